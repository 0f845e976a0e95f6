#pragma once

#include <functional>
#include <map>
#include <memory>
#include <tuple>
#include <vector>

#include "thermocap/measure.hpp"

namespace thermocap {

// Law of A - B for independent uniforms on intervals A and B: a trapezoid
// on [lo, hi] with kinks k1 <= k2, or a point mass when both are degenerate.
struct OffsetDensity {
  double lo = 0, k1 = 0, k2 = 0, hi = 0;
  double height = 0;
  bool atom = false;

  double pdf(double u) const;
  bool contains_zero() const { return atom ? lo == 0.0 : (lo <= 0.0 && hi >= 0.0); }
  // Density at 0 is positive (as opposed to vanishing linearly at a support end).
  bool positive_at_zero() const;
};

OffsetDensity offset_density(const Interval& a, const Interval& b);

// k((s,x),(t,y)) = pref * H(|t-s| + shift, ||x-y||) * phi(||x-y||) with
// H(u, r) = u^{-d/2} exp(-r^2 / 2u). With shift = 0, H(0, r) = 0 for r > 0.
// phi(r) ~ r^{-phi_exponent} near 0.
struct SpaceTimeKernel {
  int d = 1;
  double shift = 0.0;
  double prefactor = 1.0;
  std::function<double(double)> phi;
  double phi_exponent = 0.0;
  double rel_tol = 1e-8;  // quadrature target; loosen for tabulated phi

  static SpaceTimeKernel energy_gamma(int d, double gamma);
};

// E[pref * H(|U| + shift, r)] for U with the given offset law.
double time_profile(const OffsetDensity& u, double r, int d, double shift, double prefactor = 1.0);

// Whether E[k] over the cell pair is +inf, decided from the local behaviour
// at zero offset (no quadrature).
bool cell_pair_diverges(const OffsetDensity& ut, const std::vector<OffsetDensity>& ux,
                        const SpaceTimeKernel& k);

// Exact average of the kernel over cell a x cell b by nested adaptive quadrature.
// `profile` optionally replaces the time average r -> E[pref H(|U|+shift, r)].
double cell_pair_average(const Cell& a, const Cell& b, const SpaceTimeKernel& k,
                         const std::function<double(double)>* profile = nullptr);

// Energy sum_{a,b} w_a w_b E[k] of a piecewise-uniform measure (all pairs,
// including a = b), every entry by quadrature.
double cell_measure_energy(const CellMeasure& m, const SpaceTimeKernel& k);

// Mollified energy of a d = 1 cell measure for the kernel
// p_{|t-s|}(x-y) kap(|x-y|), kap ~ r^{-kap_exponent} at 0: the raw energy and,
// for each eps, the energy of (phi_eps * p)(phi_eps * kap) with Gaussian phi_eps.
// phi_eps * p_u = p_{u + eps^2}; phi_eps * kap is tabulated on [0, r_max].
struct MollifiedEnergy {
  double raw = 0.0;
  std::vector<double> eps;
  std::vector<double> smoothed;
};

MollifiedEnergy mollified_energy(const CellMeasure& m, const std::function<double(double)>& kap,
                                 double kap_exponent, const std::vector<double>& eps);

// Gamma-independent precomputation for E_gamma kernel matrices over a cell
// measure. Self and near pairs use exact quadrature; far pairs use the exact
// time average at the centre-to-centre spatial distance.
class EnergyMatrixBuilder {
 public:
  EnergyMatrixBuilder(const CellMeasure& m, double near_factor = 2.0);
  ~EnergyMatrixBuilder();

  std::size_t size() const { return n_; }
  // Row-major n x n matrix; +inf entries are legal.
  void fill(double gamma, std::vector<double>& K) const;
  std::size_t near_class_count() const { return near_keys_.size(); }

 private:
  struct TimeClass;
  int d_;
  std::size_t n_;
  std::vector<Cell> cells_;
  std::vector<std::unique_ptr<TimeClass>> time_classes_;
  std::vector<int> cell_time_index_;
  std::vector<int> tpair_class_;  // time-cell pair -> class
  std::size_t n_time_cells_ = 0;
  std::vector<float> far_a_;     // time-averaged heat factor, far pairs
  std::vector<float> far_logr_;  // log centre distance, far pairs
  std::vector<int> near_id_;     // -1 for far pairs
  std::vector<std::tuple<int, std::size_t, std::size_t>> near_keys_;  // class, representative pair
  mutable std::map<std::pair<int, double>, double> near_cache_;
};

}  // namespace thermocap

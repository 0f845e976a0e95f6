#pragma once

#include <string>
#include <vector>

#include "thermocap/fractal_sets.hpp"

namespace thermocap {

// ---- discrete energies (point atoms, self-pairs excluded) -------------------

enum class EnergyKind { Gamma, IBeta, UpsilonTau };

struct EnergyReport {
  EnergyKind kind = EnergyKind::Gamma;
  double parameter = 0.0;  // gamma, beta or tau
  double value = 0.0;      // may be +inf
  std::size_t atoms = 0;
  std::size_t excluded_pairs = 0;  // self-pairs left out of the double sum
  bool single_atom = false;
};

EnergyReport energy(const DiscreteMeasure& mu, double gamma);
EnergyReport i_beta_energy(const DiscreteMeasure& mu, double beta);
EnergyReport upsilon_tau_energy(const DiscreteMeasure& mu, double tau);

// ---- quadratic minimization over the simplex -------------------------------

struct SolverOptions {
  double tol = 1e-8;  // stop when FW gap < tol * (1 + |value|)
  long max_iter = 100000;
  std::vector<double> warm_start;  // optional, length n
};

struct CapacityReport {
  double gamma = 0.0;
  double min_energy = kInf;
  double capacity = 0.0;  // 1 / min_energy; 0 when min_energy = +inf
  long iterations = 0;
  double gap = 0.0;  // 2 (w'Kw - min_i (Kw)_i)
  double min_gradient = 0.0;  // min_i (Kw)_i at termination
  bool converged = false;
  bool degenerate_kernel = false;      // all usable entries zero
  bool infinite_pairs = false;         // +inf off-diagonal entries were penalized
  std::size_t excluded_atoms = 0;      // atoms with +inf self-energy
  std::vector<double> weights;
};

// Minimize w'Kw over the probability simplex (Frank-Wolfe with away steps).
// K is row-major n x n and symmetric; +inf entries are allowed.
CapacityReport minimize_quadratic(const std::vector<double>& K, std::size_t n,
                                  const SolverOptions& opt = {});

// Point atoms with the self-pair exclusion convention (zero diagonal). The
// form is then indefinite and the optimizer returns a stationary point.
std::vector<double> point_energy_matrix(const DiscreteMeasure& atoms, double gamma);
CapacityReport min_energy(const DiscreteMeasure& atoms, double gamma, const SolverOptions& opt = {});

// Cell atoms: K_ab is the exact E_gamma average over cell a x cell b, so
// w'Kw is the energy of the piecewise-uniform measure.
CapacityReport min_energy(const CellMeasure& cells, double gamma, const SolverOptions& opt = {});

// ---- Delta estimator --------------------------------------------------------

struct GammaGrid {
  double min = 0.0;
  double max = 2.0;
  double step = 0.02;
  std::vector<double> values() const;
};

struct LevelRange {
  int min = 5;
  int max = 9;
};

struct DeltaOptions {
  int time_level = -1;  // -1: automatic (level 0 for full intervals, parabolic match otherwise)
  double near_factor = 2.0;
  SolverOptions solver;
  // An increment sequence I_n = e_{n+1} - e_n is read as geometric,
  // I_n ~ C n^a lambda^n; gamma is FINITE iff the fitted lambda < threshold.
  double rate_threshold = 0.97;
  // Ratio rule, reported alongside: median e_{n+1}/e_n over the top half < 1.2.
  double ratio_threshold = 1.2;
  std::size_t max_atoms = 10000;
};

enum class Growth { Finite, Infinite };

struct DeltaEstimate {
  std::vector<double> gammas;
  std::vector<int> levels;
  std::vector<int> time_levels;
  std::vector<std::vector<double>> energies;  // [gamma][level]
  std::vector<std::vector<double>> ratios;    // e_{n+1}/e_n
  std::vector<double> rates;                  // fitted lambda per gamma
  std::vector<double> median_ratios;
  std::vector<Growth> growth;
  std::vector<Growth> ratio_rule_growth;  // ratio rule, diagnostics only
  double delta = 0.0;
  bool boundary_low = false;   // no FINITE gamma on the grid
  bool boundary_high = false;  // no INFINITE gamma on the grid
  bool non_monotone = false;
  std::string rule;
};

// Time refinement level paired with a space level.
int matched_time_level(const ProductSetSpec& product, int space_level, int fixed = -1);

// Growth classification of minimal energies over consecutive levels
// first_level, first_level + 1, ... Fits log I_n = c + a log n + n log lambda
// to the increments (a = 0 with fewer than 4 of them).
Growth classify_growth(const std::vector<double>& e, double rate_threshold, double* rate = nullptr,
                       int first_level = 1);

DeltaEstimate estimate_delta(const ProductSetSpec& product, const GammaGrid& grid,
                             const LevelRange& levels, const DeltaOptions& opt = {});

struct ThermalReport {
  bool positive = false;
  std::vector<int> levels;
  std::vector<double> energies;  // e_n(0)
  double rate = 0.0;
  bool space_has_positive_measure = false;  // warning flag
};

ThermalReport thermal_capacity_positive(const ProductSetSpec& product, const LevelRange& levels,
                                        const DeltaOptions& opt = {});

// C_gamma(E x F) > 0, read from the growth of the minimal cell energies at
// one gamma over the level range.
struct CapacitySign {
  double gamma = 0.0;
  bool positive = false;
  std::vector<int> levels;
  std::vector<double> energies;
  double rate = 0.0;
};

CapacitySign capacity_positive(const ProductSetSpec& product, double gamma, const LevelRange& levels,
                               const DeltaOptions& opt = {});

}  // namespace thermocap

#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "thermocap/common.hpp"

namespace thermocap {

// ---- heat kernel -------------------------------------------------------

// (2 pi t)^{-d/2} exp(-r^2 / 2t) for t > 0, else 0.
double heat_kernel(double t, double r, int d);
double heat_kernel(double t, const Vec& x, int d);

// ---- isotropic stable densities -----------------------------------------
// Characteristic function exp(-||xi||^alpha / 2) at total time 1.

// Value at the origin, closed form.
double stable_density_at_zero(double alpha, int d);

// Radial Fourier inversion by adaptive quadrature (no table).
double stable_density_direct(double alpha, int d, double r);

class StableDensityTable {
 public:
  StableDensityTable(double alpha, int d, double r_min = 1e-6, double r_max = 1e3,
                     int per_decade = 100);
  ~StableDensityTable();
  StableDensityTable(const StableDensityTable&) = delete;
  StableDensityTable& operator=(const StableDensityTable&) = delete;

  double operator()(double r) const;

  double alpha() const { return alpha_; }
  int d() const { return d_; }
  double r_min() const { return r_.front(); }
  double r_max() const { return r_.back(); }
  // c in the tail form c / r^{d+alpha} used above r_max.
  double tail_constant() const { return tail_c_; }
  const std::vector<double>& radii() const { return r_; }
  std::vector<double> values() const;

  // CSV: a header line "# alpha=<a> d=<d> r_min=<..> r_max=<..>" then radius,density rows.
  void dump_csv(const std::string& path) const;

 private:
  double alpha_;
  int d_;
  std::vector<double> r_, logr_, logg_;
  double tail_c_ = 0.0;
  void* interp_ = nullptr;  // gsl_interp (Steffen)
};

// Shared immutable table per (alpha, d), built on first use.
const StableDensityTable& stable_table(double alpha, int d);

double stable_density(double alpha, int d, double r);
double stable_density(double alpha, int d, const Vec& z);
// t^{-d/alpha} g(r t^{-1/alpha})
double stable_density_scaled(double alpha, int d, double t_total, double r);

// ---- resolvent integral kappa --------------------------------------------

// kappa(z) = int_{box} g_{|u|}(z) du over box = prod [0, b_k], |u| = sum u_k.
class ResolventKappa {
 public:
  enum class Source { Table, Direct };

  ResolventKappa(double alpha, int N, int d, std::vector<double> box, Source src = Source::Table);

  // Power-law form A r^{-(d - alpha N)} below the cutoff when d > alpha N.
  double operator()(double r) const;
  // Quadrature only; throws NumericalError on failure.
  double quadrature(double r) const;
  // Volume density of {u in box : |u| = s}.
  double volume_density(double s) const;

  double exponent() const { return d_ - alpha_ * N_; }
  double cutoff() const { return cutoff_; }
  double fitted_constant() const;

 private:
  double alpha_;
  int N_;
  int d_;
  std::vector<double> box_;
  Source src_;
  double total_;
  double cutoff_ = 1e-4;
  std::vector<double> corners_;  // subset sums of box sides
  std::vector<int> corner_sign_;
  mutable std::once_flag fit_once_;
  mutable double A_ = 0.0;
  double g(double t, double r) const;
};

double kappa(double alpha, int N, int d, double r, const std::vector<double>& box);

// ---- 1-potential density (d = 1) -------------------------------------------

// int_0^inf g_t(x) e^{-t} dt; +inf at x = 0.
double potential_upsilon(double alpha, double x);

// ---- energy kernels ---------------------------------------------------------

// exp(-||x-y||^2 / 2|t-s|) / (|t-s|^{d/2} ||x-y||^gamma); 0 when s = t and x != y;
// +inf at coincident points.
double energy_kernel_gamma(double s, const Vec& x, double t, const Vec& y, double gamma, int d);

// exp(-||x-y||^2 / 2|t-s|) / |t-s|^{beta/2} for s != t, else 0.
double i_beta_kernel(double s, const Vec& x, double t, const Vec& y, double beta, int d);

// rho(p,q)^{-tau}; +inf on the diagonal.
double bessel_riesz_kernel_rho(const SpaceTimePoint& p, const SpaceTimePoint& q, double tau, int d);

// max(sup_{z>1} z^{2 beta} e^{-z/2}, 1)
double i_beta_domination_constant(double beta);

// ---- tabulated radial functions ---------------------------------------------------

// f on a log grid over [r_min, r_max] with a cubic spline in log-log;
// c r^{-low_exponent} below r_min (matched at r_min) and the end value above r_max.
// f must be positive on the grid.
class RadialTable {
 public:
  RadialTable(const std::function<double(double)>& f, double r_min, double r_max, int per_decade,
              double low_exponent);
  ~RadialTable();
  RadialTable(const RadialTable&) = delete;
  RadialTable& operator=(const RadialTable&) = delete;
  double operator()(double r) const;

 private:
  std::vector<double> lr_, lf_;
  double low_exponent_;
  void* interp_ = nullptr;
};

// ---- mollifiers ---------------------------------------------------------------

enum class MollifierKind { Ball, Gaussian };

// Normalized ball indicator f_eps.
double ball_density(double eps, double r, int d);
// Ball kind: f_eps * f_eps (closed form for d <= 3). Gaussian kind: N(0, eps^2 I).
double mollifier(MollifierKind kind, double eps, double r, int d);

// (phi_eps * f)(r) in d = 1 for an even f with an integrable singularity at 0
// and Gaussian phi_eps of scale eps. Mass beyond 10 eps is dropped.
double gaussian_smooth_1d(const std::function<double(double)>& f, double eps, double r);

}  // namespace thermocap

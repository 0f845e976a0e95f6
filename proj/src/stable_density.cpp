#include <gsl/gsl_interp.h>
#include <gsl/gsl_sf_bessel.h>
#include <gsl/gsl_sf_gamma.h>
#include <gsl/gsl_sum.h>

#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>

#include "thermocap/kernels.hpp"
#include "thermocap/quadrature.hpp"

namespace thermocap {

namespace {

void check_alpha_d(double alpha, int d) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw ConfigError("alpha must lie in (0, 2]");
  require_dim(d);
}

// (2 pi)^{-d} |S^{d-1}|
double radial_prefactor(int d) {
  double sphere = 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d);
  return sphere / std::pow(2.0 * kPi, d);
}

// j_d(x): radial factor of the d-dimensional Fourier transform.
double radial_wave(int d, double x) {
  switch (d) {
    case 1:
      return std::cos(x);
    case 2:
      return gsl_sf_bessel_J0(x);
    default:
      return x < 1e-4 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
  }
}

// xi beyond which exp(-xi^alpha / 2) < e^{-40}
double xi_cut(double alpha) { return std::pow(80.0, 1.0 / alpha); }

double direct_small(double alpha, int d, double r) {
  quad::Result res;
  if (alpha < 1.0) {
    // v = xi^alpha removes the cusp of exp(-xi^alpha/2) at 0
    quad::Fn f = [=](double v) {
      if (v <= 0) return 0.0;
      return std::pow(v, d / alpha - 1.0) * std::exp(-0.5 * v) *
             radial_wave(d, r * std::pow(v, 1.0 / alpha)) / alpha;
    };
    res = quad::qags(f, 0.0, 80.0, {0.0, 1e-10, 4000});
  } else {
    quad::Fn f = [=](double xi) {
      return std::pow(xi, d - 1) * std::exp(-0.5 * std::pow(xi, alpha)) * radial_wave(d, r * xi);
    };
    res = quad::qags(f, 0.0, xi_cut(alpha), {0.0, 1e-10, 4000});
  }
  double floor = 1e-13 * stable_density_at_zero(alpha, d) / radial_prefactor(d);
  return radial_prefactor(d) * quad::checked(res, "stable density (small r)", 1e-7, floor);
}

// Leading tail coefficient: g(r) ~ c1 r^{-(d+alpha)}.
double tail_coefficient(double alpha, int d) {
  return 0.5 * std::pow(2.0, alpha) * std::tgamma(0.5 * alpha + 1.0) *
         std::tgamma(0.5 * (alpha + d)) * std::sin(0.5 * kPi * alpha) /
         std::pow(kPi, 0.5 * d + 1.0);
}

double magnitude_guess(double alpha, int d, double r) {
  double g0 = stable_density_at_zero(alpha, d);
  double tail = tail_coefficient(alpha, d) * std::pow(r, -(d + alpha));
  if (alpha >= 2.0 - 1e-12 || tail <= 0) return g0 * std::exp(-0.5 * r * r) + 1e-300;
  return std::min(g0, tail);
}

double direct_d1_d3(double alpha, int d, double r) {
  double scale = magnitude_guess(alpha, d, r);
  quad::Result res;
  if (d == 1) {
    quad::Fn f = [=](double xi) { return std::exp(-0.5 * std::pow(xi, alpha)); };
    res = quad::qawf(f, 0.0, r, false, {scale * 1e-10 * kPi, 0.0, 2000});
    return quad::checked(res, "stable density (d=1)", 1e-6, 1e-13 * kPi * stable_density_at_zero(alpha, d)) / kPi;
  }
  quad::Fn f = [=](double xi) { return xi * std::exp(-0.5 * std::pow(xi, alpha)); };
  res = quad::qawf(f, 0.0, r, true, {scale * 1e-10 * r * 2 * kPi * kPi, 0.0, 2000});
  return quad::checked(res, "stable density (d=3)", 1e-6,
                       1e-13 * 2 * kPi * kPi * r * stable_density_at_zero(alpha, d)) /
         (2.0 * kPi * kPi * r);
}

double direct_d2(double alpha, double r) {
  // integrate xi J0(r xi) e^{-xi^alpha/2} between zeros of J0, then Levin-u
  quad::Fn f = [=](double xi) {
    return xi * gsl_sf_bessel_J0(r * xi) * std::exp(-0.5 * std::pow(xi, alpha));
  };
  const double xmax = xi_cut(alpha);
  const int max_terms = 80;
  std::vector<double> terms;
  double prev = 0.0;
  double direct_sum = 0.0;
  bool reached_end = false;
  for (unsigned k = 1; terms.size() < static_cast<std::size_t>(max_terms); ++k) {
    double z = gsl_sf_bessel_zero_J0(k) / r;
    bool last = z >= xmax;
    if (last) z = xmax;
    auto res = quad::qags(f, prev, z, {1e-300, 1e-12, 1000});
    double v = quad::checked(res, "stable density (d=2 cycle)", 1e-8);
    terms.push_back(v);
    direct_sum += v;
    prev = z;
    if (last) {
      reached_end = true;
      break;
    }
  }
  if (reached_end) return direct_sum / (2.0 * kPi);
  gsl_sum_levin_u_workspace* w = gsl_sum_levin_u_alloc(terms.size());
  double sum = 0.0, err = 0.0;
  int st = gsl_sum_levin_u_accel(terms.data(), terms.size(), w, &sum, &err);
  gsl_sum_levin_u_free(w);
  if (st != 0 || !std::isfinite(sum)) throw NumericalError("stable density (d=2): Levin failure", err);
  return sum / (2.0 * kPi);
}

}  // namespace

double stable_density_at_zero(double alpha, int d) {
  check_alpha_d(alpha, d);
  return radial_prefactor(d) * std::tgamma(d / alpha) * std::pow(2.0, d / alpha) / alpha;
}

double stable_density_direct(double alpha, int d, double r) {
  check_alpha_d(alpha, d);
  r = std::abs(r);
  if (r == 0.0) return stable_density_at_zero(alpha, d);
  if (r * xi_cut(alpha) <= 200.0) return direct_small(alpha, d, r);
  if (d == 2) return direct_d2(alpha, r);
  return direct_d1_d3(alpha, d, r);
}

StableDensityTable::StableDensityTable(double alpha, int d, double r_min, double r_max,
                                       int per_decade)
    : alpha_(alpha), d_(d) {
  check_alpha_d(alpha, d);
  const double g0 = stable_density_at_zero(alpha, d);
  const int n = static_cast<int>(std::ceil(std::log10(r_max / r_min) * per_decade)) + 1;
  const double step = std::log(r_max / r_min) / (n - 1);
  for (int i = 0; i < n; ++i) {
    double r = r_min * std::exp(step * i);
    double g = stable_density_direct(alpha, d, r);
    if (!(g > 0.0)) break;
    r_.push_back(r);
    logr_.push_back(std::log(r));
    logg_.push_back(std::log(g));
    if (g < 1e-12 * g0) break;
  }
  if (r_.size() < 4) throw NumericalError("stable density table has too few points");
  tail_c_ = std::exp(logg_.back()) * std::pow(r_.back(), d + alpha);
  auto* it = gsl_interp_alloc(gsl_interp_steffen, r_.size());
  gsl_interp_init(it, logr_.data(), logg_.data(), r_.size());
  interp_ = it;
}

StableDensityTable::~StableDensityTable() { gsl_interp_free(static_cast<gsl_interp*>(interp_)); }

double StableDensityTable::operator()(double r) const {
  r = std::abs(r);
  if (r < r_.front()) return stable_density_direct(alpha_, d_, r);
  if (r > r_.back()) {
    if (alpha_ >= 2.0) return std::pow(2.0 * kPi, -0.5 * d_) * std::exp(-0.5 * r * r);
    return tail_c_ * std::pow(r, -(d_ + alpha_));
  }
  double lr = std::log(r);
  return std::exp(gsl_interp_eval(static_cast<gsl_interp*>(interp_), logr_.data(), logg_.data(),
                                  lr, nullptr));
}

std::vector<double> StableDensityTable::values() const {
  std::vector<double> v;
  for (double lg : logg_) v.push_back(std::exp(lg));
  return v;
}

void StableDensityTable::dump_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path);
  os.precision(17);
  os << "# alpha=" << alpha_ << " d=" << d_ << " r_min=" << r_.front() << " r_max=" << r_.back()
     << "\nradius,density\n";
  for (std::size_t i = 0; i < r_.size(); ++i) os << r_[i] << ',' << std::exp(logg_[i]) << '\n';
}

const StableDensityTable& stable_table(double alpha, int d) {
  static std::mutex mu;
  static std::map<std::pair<double, int>, std::unique_ptr<StableDensityTable>> tables;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = tables[{alpha, d}];
  if (!slot) slot = std::make_unique<StableDensityTable>(alpha, d);
  return *slot;
}

double stable_density(double alpha, int d, double r) { return stable_table(alpha, d)(r); }

double stable_density(double alpha, int d, const Vec& z) {
  return stable_density(alpha, d, norm(z, d));
}

double stable_density_scaled(double alpha, int d, double t_total, double r) {
  if (!(t_total > 0)) throw ConfigError("t_total must be positive");
  double s = std::pow(t_total, 1.0 / alpha);
  return std::pow(t_total, -d / alpha) * stable_density(alpha, d, r / s);
}

}  // namespace thermocap

#include "thermocap/kernels.hpp"

#include <algorithm>
#include <cmath>

#include <gsl/gsl_interp.h>

#include "thermocap/parabolic_geometry.hpp"
#include "thermocap/quadrature.hpp"

namespace thermocap {

double heat_kernel(double t, double r, int d) {
  if (!(t > 0.0)) return 0.0;
  return std::pow(2.0 * kPi * t, -0.5 * d) * std::exp(-0.5 * r * r / t);
}

double heat_kernel(double t, const Vec& x, int d) { return heat_kernel(t, norm(x, d), d); }

// ---- kappa ------------------------------------------------------------------

ResolventKappa::ResolventKappa(double alpha, int N, int d, std::vector<double> box, Source src)
    : alpha_(alpha), N_(N), d_(d), box_(std::move(box)), src_(src) {
  if (!(alpha > 0 && alpha <= 2)) throw ConfigError("alpha must lie in (0, 2]");
  require_dim(d);
  if (N < 1 || N > 12) throw ConfigError("N must lie in [1, 12]");
  if (box_.size() == 1 && N > 1) box_.assign(N, box_[0]);
  if (static_cast<int>(box_.size()) != N) throw ConfigError("box needs one side per axis");
  total_ = 0.0;
  for (double b : box_) {
    if (!(b > 0)) throw ConfigError("box sides must be positive");
    total_ += b;
  }
  for (unsigned mask = 0; mask < (1u << N); ++mask) {
    double s = 0.0;
    int bits = 0;
    for (int k = 0; k < N; ++k)
      if (mask & (1u << k)) {
        s += box_[k];
        ++bits;
      }
    corners_.push_back(s);
    corner_sign_.push_back(bits % 2 ? -1 : 1);
  }
}

double ResolventKappa::volume_density(double s) const {
  if (s <= 0.0 || s >= total_) return 0.0;
  double fact = std::tgamma(static_cast<double>(N_));
  double v = 0.0;
  for (std::size_t i = 0; i < corners_.size(); ++i) {
    double u = s - corners_[i];
    if (u <= 0.0) continue;
    v += corner_sign_[i] * (N_ == 1 ? 1.0 : std::pow(u, N_ - 1));
  }
  return std::max(v / fact, 0.0);
}

double ResolventKappa::g(double t, double r) const {
  double s = std::pow(t, 1.0 / alpha_);
  double z = r / s;
  double base = src_ == Source::Table ? stable_density(alpha_, d_, z)
                                      : stable_density_direct(alpha_, d_, z);
  return std::pow(t, -d_ / alpha_) * base;
}

double ResolventKappa::quadrature(double r) const {
  r = std::abs(r);
  if (r == 0.0) {
    if (exponent() >= 0.0) return kInf;
    quad::Fn f = [&](double w) {
      double s = std::exp(w);
      return volume_density(s) * s * std::pow(s, -d_ / alpha_);
    };
    std::vector<double> pts{std::log(total_) - 60.0, std::log(total_)};
    for (double c : corners_)
      if (c > 0 && c < total_) pts.push_back(std::log(c));
    return stable_density_at_zero(alpha_, d_) *
           quad::checked(quad::qagp(f, pts, {0.0, 1e-10, 2000}), "kappa(0)");
  }
  const double wr = alpha_ * std::log(r);
  const double whi = std::log(total_);
  const double wlo = std::min(wr, whi) - 40.0;
  quad::Fn f = [&](double w) {
    double s = std::exp(w);
    return volume_density(s) * s * g(s, r);
  };
  std::vector<double> pts{wlo, whi};
  if (wr > wlo && wr < whi) pts.push_back(wr);
  for (double c : corners_)
    if (c > 0 && c < total_) pts.push_back(std::log(c));
  auto res = quad::qagp(f, pts, {0.0, 1e-11, 4000});
  // the interpolated table carries about 1e-7 relative error
  return quad::checked(res, "kappa quadrature", src_ == Source::Table ? 1e-6 : 1e-8);
}

double ResolventKappa::fitted_constant() const {
  std::call_once(fit_once_, [&] {
    double e = exponent();
    double acc = 0.0;
    const int n = 21;
    for (int i = 0; i < n; ++i) {
      double r = cutoff_ * std::pow(100.0, static_cast<double>(i) / (n - 1));
      acc += std::log(quadrature(r)) + e * std::log(r);
    }
    A_ = std::exp(acc / n);
  });
  return A_;
}

double ResolventKappa::operator()(double r) const {
  r = std::abs(r);
  if (exponent() > 0.0 && r < cutoff_) {
    if (r == 0.0) return kInf;
    return fitted_constant() * std::pow(r, -exponent());
  }
  return quadrature(r);
}

double kappa(double alpha, int N, int d, double r, const std::vector<double>& box) {
  return ResolventKappa(alpha, N, d, box)(r);
}

// ---- upsilon ------------------------------------------------------------------

double potential_upsilon(double alpha, double x) {
  if (!(alpha > 0 && alpha < 1)) throw ConfigError("potential_upsilon needs alpha in (0, 1)");
  x = std::abs(x);
  if (x == 0.0) return kInf;
  const double wx = alpha * std::log(x);
  const double whi = std::log(80.0);
  const double wlo = std::min(wx, whi) - 25.0;
  quad::Fn f = [&](double w) {
    double t = std::exp(w);
    return t * std::exp(-t) * stable_density_scaled(alpha, 1, t, x);
  };
  std::vector<double> pts{wlo, whi};
  if (wx > wlo && wx < whi) pts.push_back(wx);
  return quad::checked(quad::qagp(f, pts, {0.0, 1e-11, 4000}), "upsilon quadrature", 1e-8);
}

// ---- energy kernels ---------------------------------------------------------------

double energy_kernel_gamma(double s, const Vec& x, double t, const Vec& y, double gamma, int d) {
  double r = dist(x, y, d);
  double u = std::abs(t - s);
  if (u == 0.0) return r == 0.0 ? kInf : 0.0;
  if (r == 0.0) return gamma > 0.0 ? kInf : std::pow(u, -0.5 * d);
  return std::exp(-0.5 * r * r / u) / (std::pow(u, 0.5 * d) * std::pow(r, gamma));
}

double i_beta_kernel(double s, const Vec& x, double t, const Vec& y, double beta, int d) {
  double u = std::abs(t - s);
  if (u == 0.0) return 0.0;
  double r = dist(x, y, d);
  return std::exp(-0.5 * r * r / u) * std::pow(u, -0.5 * beta);
}

double bessel_riesz_kernel_rho(const SpaceTimePoint& p, const SpaceTimePoint& q, double tau, int d) {
  double r = rho(p, q, d);
  if (r == 0.0) return kInf;
  return std::pow(r, -tau);
}

double i_beta_domination_constant(double beta) {
  double sup = 4.0 * beta > 1.0 ? std::pow(4.0 * beta, 2.0 * beta) * std::exp(-2.0 * beta)
                                : std::exp(-0.5);
  return std::max(sup, 1.0);
}

// ---- mollifiers -------------------------------------------------------------------

namespace {
double ball_volume(int d) { return std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d + 1.0); }
}  // namespace

double ball_density(double eps, double r, int d) {
  if (!(eps > 0)) throw ConfigError("mollifier width must be positive");
  return std::abs(r) <= eps ? 1.0 / (ball_volume(d) * std::pow(eps, d)) : 0.0;
}

double mollifier(MollifierKind kind, double eps, double r, int d) {
  if (!(eps > 0)) throw ConfigError("mollifier width must be positive");
  require_dim(d);
  r = std::abs(r);
  if (kind == MollifierKind::Gaussian)
    return std::pow(2.0 * kPi * eps * eps, -0.5 * d) * std::exp(-0.5 * r * r / (eps * eps));
  if (r >= 2.0 * eps) return 0.0;
  double norm2 = std::pow(ball_volume(d) * std::pow(eps, d), 2);
  double overlap;
  switch (d) {
    case 1:
      overlap = 2.0 * eps - r;
      break;
    case 2:
      overlap = 2.0 * eps * eps * std::acos(r / (2.0 * eps)) -
                0.5 * r * std::sqrt(4.0 * eps * eps - r * r);
      break;
    default:
      overlap = kPi * (4.0 * eps + r) * (2.0 * eps - r) * (2.0 * eps - r) / 12.0;
  }
  return overlap / norm2;
}

}  // namespace thermocap

namespace thermocap {

RadialTable::RadialTable(const std::function<double(double)>& f, double r_min, double r_max,
                         int per_decade, double low_exponent)
    : low_exponent_(low_exponent) {
  if (!(r_min > 0 && r_max > r_min) || per_decade < 2) throw ConfigError("radial table: bad grid");
  int n = static_cast<int>(std::ceil(std::log10(r_max / r_min) * per_decade)) + 1;
  for (int i = 0; i < n; ++i) {
    double lr = std::log(r_min) + (std::log(r_max) - std::log(r_min)) * i / (n - 1);
    double v = f(std::exp(lr));
    if (!(v > 0) || !std::isfinite(v)) throw NumericalError("radial table: non-positive value", v);
    lr_.push_back(lr);
    lf_.push_back(std::log(v));
  }
  auto* it = gsl_interp_alloc(gsl_interp_cspline, lr_.size());
  gsl_interp_init(it, lr_.data(), lf_.data(), lr_.size());
  interp_ = it;
}

RadialTable::~RadialTable() { gsl_interp_free(static_cast<gsl_interp*>(interp_)); }

double RadialTable::operator()(double r) const {
  if (!(r > 0)) return low_exponent_ > 0 ? kInf : std::exp(lf_.front());
  double lr = std::log(r);
  if (lr <= lr_.front()) return std::exp(lf_.front() - low_exponent_ * (lr - lr_.front()));
  if (lr >= lr_.back()) return std::exp(lf_.back());
  return std::exp(gsl_interp_eval(static_cast<gsl_interp*>(interp_), lr_.data(), lf_.data(), lr, nullptr));
}

double gaussian_smooth_1d(const std::function<double(double)>& f, double eps, double r) {
  if (!(eps > 0)) throw ConfigError("mollifier width must be positive");
  auto phi = [&](double u) { return std::exp(-0.5 * u * u / (eps * eps)) / (eps * std::sqrt(2 * kPi)); };
  // w = |r - u| on each side of u = r, then w = v^2 to flatten the singularity of f
  double total = 0.0;
  for (int side : {-1, 1}) {
    // u = r + side * w stays inside [-10 eps, 10 eps]
    double wmax = side == -1 ? r + 10 * eps : 10 * eps - r;
    if (!(wmax > 0)) continue;
    quad::Fn g = [&, side](double v) {
      double w = v * v;
      return 2 * v * f(w) * phi(side == -1 ? r - w : r + w);
    };
    total += quad::checked(quad::qags(g, 0.0, std::sqrt(wmax), {0.0, 1e-10, 2000}), "gaussian smoothing", 1e-8);
  }
  return total;
}

}  // namespace thermocap

#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_expint.h>

#include <cmath>
#include <functional>

#include "doctest.h"
#include "thermocap/kernels.hpp"

using namespace thermocap;

namespace {

double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  double h = (b - a) / n, s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4 : 2);
  return s * h / 3;
}

// (2 pi)^{-d} int exp(-|xi|^alpha / 2) d xi
double density_at_zero(double alpha, int d) {
  double sphere = d == 1 ? 2.0 : 2 * kPi;
  return std::pow(2 * kPi, -d) * sphere * std::tgamma(d / alpha) * std::pow(2.0, d / alpha) / alpha;
}

double cauchy2(double r) { return 0.5 / (2 * kPi * std::pow(r * r + 0.25, 1.5)); }

}  // namespace

TEST_CASE("heat kernel normalization") {
  for (double t : {0.1, 1.0, 10.0}) {
    double L = 12 * std::sqrt(t);
    double m1 = simpson([&](double x) { return heat_kernel(t, std::abs(x), 1); }, -L, L, 4000);
    double m2 = simpson([&](double r) { return 2 * kPi * r * heat_kernel(t, r, 2); }, 0, L, 4000);
    CHECK(std::abs(m1 - 1) < 1e-9);
    CHECK(std::abs(m2 - 1) < 1e-9);
  }
  CHECK(heat_kernel(0.0, 1.0, 1) == 0.0);
}

TEST_CASE("stable densities against closed forms") {
  for (double r : {0.0, 0.3, 1.0, 2.5, 5.0}) {
    CHECK(std::abs(stable_density(2.0, 1, r) - std::exp(-0.5 * r * r) / std::sqrt(2 * kPi)) < 1e-6);
    CHECK(std::abs(stable_density(2.0, 2, r) - std::exp(-0.5 * r * r) / (2 * kPi)) < 1e-6);
    CHECK(stable_density(1.0, 1, r) == doctest::Approx(0.5 / (kPi * (r * r + 0.25))).epsilon(1e-4));
    CHECK(stable_density(1.0, 2, r) == doctest::Approx(cauchy2(r)).epsilon(1e-4));
  }
  for (double a : {0.5, 1.0, 1.5}) {
    CHECK(stable_density_at_zero(a, 1) == doctest::Approx(density_at_zero(a, 1)).epsilon(1e-10));
    CHECK(stable_density_at_zero(a, 2) == doctest::Approx(density_at_zero(a, 2)).epsilon(1e-10));
  }
  CHECK(stable_density_scaled(2.0, 1, 4.0, 0.0) == doctest::Approx(0.19947).epsilon(1e-4));
  double t = 2.7, r = 0.8;
  CHECK(stable_density_scaled(1.5, 2, t, r) * std::pow(t, 2 / 1.5) ==
        doctest::Approx(stable_density(1.5, 2, r * std::pow(t, -1 / 1.5))).epsilon(1e-10));
}

TEST_CASE("stable density mass") {
  // radial mass in d = 1 for alpha = 1.5; the tail beyond 200 is c/r^{2.5} territory
  double m = 2 * simpson([](double x) { return stable_density(1.5, 1, x); }, 0, 200, 200000);
  CHECK(m == doctest::Approx(1.0).epsilon(2e-4));
}

TEST_CASE("kappa for alpha = 2 is an exponential integral") {
  // int_0^1 (2 pi u)^{-1} exp(-r^2 / 2u) du = E1(r^2 / 2) / (2 pi)
  for (double r : {0.05, 0.2, 0.7, 1.5}) {
    double want = gsl_sf_expint_E1(0.5 * r * r) / (2 * kPi);
    CHECK(kappa(2.0, 1, 2, r, {1.0}) == doctest::Approx(want).epsilon(1e-6));
    ResolventKappa direct(2.0, 1, 2, {1.0}, ResolventKappa::Source::Direct);
    CHECK(direct(r) == doctest::Approx(want).epsilon(1e-8));
  }
}

TEST_CASE("upsilon against its Fourier representation") {
  // upsilon(x) = (1/pi) int_0^inf cos(xi x) / (1 + xi^alpha / 2) d xi
  const double alpha = 0.5;
  gsl_integration_workspace* w = gsl_integration_workspace_alloc(4000);
  gsl_integration_workspace* cw = gsl_integration_workspace_alloc(4000);
  for (double x : {0.05, 0.3, 1.0}) {
    gsl_integration_qawo_table* tab = gsl_integration_qawo_table_alloc(x, 1.0, GSL_INTEG_COSINE, 60);
    auto fn = [](double xi, void* p) { return 1.0 / (1.0 + std::pow(xi, *static_cast<double*>(p)) / 2.0); };
    double a = alpha;
    gsl_function F{+fn, &a};
    double val, err;
    gsl_integration_qawf(&F, 0.0, 1e-10, 4000, w, cw, tab, &val, &err);
    gsl_integration_qawo_table_free(tab);
    CHECK(potential_upsilon(alpha, x) == doctest::Approx(val / kPi).epsilon(1e-5));
    CHECK(potential_upsilon(alpha, -x) == doctest::Approx(potential_upsilon(alpha, x)).epsilon(1e-12));
  }
  gsl_integration_workspace_free(w);
  gsl_integration_workspace_free(cw);
  CHECK(std::isinf(potential_upsilon(alpha, 0.0)));
}

TEST_CASE("energy kernels") {
  Vec x{0, 0, 0}, y{1, 0, 0};
  CHECK(energy_kernel_gamma(1, x, 2, y, 0.5, 1) == doctest::Approx(std::exp(-0.5)).epsilon(1e-7));
  CHECK(energy_kernel_gamma(1, x, 1, y, 0.5, 1) == 0.0);
  CHECK(std::isinf(energy_kernel_gamma(1, x, 1, x, 0.5, 1)));
  CHECK(i_beta_kernel(1, x, 2, x, 1.0, 1) == doctest::Approx(1.0));
  CHECK(i_beta_kernel(1, x, 1, y, 1.0, 1) == 0.0);
  CHECK(i_beta_domination_constant(1.0) == doctest::Approx(16 * std::exp(-2.0)));
  CHECK(i_beta_domination_constant(0.1) == 1.0);
  SpaceTimePoint p{1, x}, q{2, x};
  CHECK(bessel_riesz_kernel_rho(p, q, 0.7, 1) == doctest::Approx(1.0));
  CHECK(std::isinf(bessel_riesz_kernel_rho(p, p, 0.7, 1)));
}

TEST_CASE("mollifiers integrate to one") {
  CHECK(mollifier(MollifierKind::Gaussian, 1.0, 0.0, 1) == doctest::Approx(0.3989423).epsilon(1e-7));
  for (auto k : {MollifierKind::Gaussian, MollifierKind::Ball}) {
    double m1 = 2 * simpson([&](double r) { return mollifier(k, 0.3, r, 1); }, 0, 3, 30000);
    double m2 = simpson([&](double r) { return 2 * kPi * r * mollifier(k, 0.3, r, 2); }, 0, 3, 30000);
    CHECK(m1 == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(m2 == doctest::Approx(1.0).epsilon(1e-6));
  }
  CHECK_THROWS_AS(mollifier(MollifierKind::Ball, 0.0, 0.1, 1), ConfigError);
}

TEST_CASE("Gaussian smoothing in d = 1") {
  std::function<double(double)> one = [](double) { return 1.0; };
  std::function<double(double)> sq = [](double r) { return r * r; };
  std::function<double(double)> sing = [](double r) { return 1.0 / std::sqrt(r); };
  CHECK(gaussian_smooth_1d(one, 0.2, 0.5) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(gaussian_smooth_1d(sq, 0.2, 0.5) == doctest::Approx(0.25 + 0.04).epsilon(1e-9));
  // E |eps Z|^{-1/2} = eps^{-1/2} 2^{-1/4} Gamma(1/4) / sqrt(pi)
  double want = std::pow(0.2, -0.5) * std::pow(2.0, -0.25) * std::tgamma(0.25) / std::sqrt(kPi);
  CHECK(gaussian_smooth_1d(sing, 0.2, 0.0) == doctest::Approx(want).epsilon(1e-7));
}

TEST_CASE("radial table") {
  std::function<double(double)> f = [](double r) { return std::pow(r, -0.5) * std::exp(-r); };
  RadialTable t(f, 1e-4, 10.0, 80, 0.5);
  for (double r : {2e-4, 0.013, 0.5, 3.3}) CHECK(t(r) == doctest::Approx(f(r)).epsilon(1e-6));
  CHECK(t(1e-6) == doctest::Approx(f(1e-4) * 10.0).epsilon(1e-9));
}

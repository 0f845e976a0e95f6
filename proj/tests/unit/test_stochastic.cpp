#include <cmath>

#include "doctest.h"
#include "thermocap/experiments.hpp"
#include "thermocap/stats.hpp"
#include "thermocap/stochastic.hpp"

using namespace thermocap;

namespace {
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
}  // namespace

TEST_CASE("Brownian increments are N(0, dt)") {
  RngStream rng(3, 0);
  std::vector<double> z;
  for (int i = 0; i < 5000; ++i) {
    auto p = sample_brownian({0.25, 1.0}, 1, rng);
    z.push_back((p.values[1][0] - p.values[0][0]) / std::sqrt(0.75));
  }
  CHECK(ks_one_sample(z, normal_cdf).p_value > 1e-3);
  CHECK_THROWS_AS(sample_brownian({1.0, 0.5}, 1, rng), ConfigError);
}

TEST_CASE("bridge midpoint law") {
  RngStream rng(4, 0);
  BrownianPath p;
  p.d = 1;
  p.times = {0.0, 1.0};
  p.values = {Vec{0, 0, 0}, Vec{1.0, 0, 0}};
  std::vector<double> z;
  for (int i = 0; i < 5000; ++i) {
    auto q = refine_bridge(p, 0.0, 1.0, {0.5, 0.25}, rng);
    REQUIRE(q.size() == 4);
    CHECK(q.values.back()[0] == 1.0);
    // W(1/2) | W(0)=0, W(1)=1 ~ N(1/2, 1/4)
    z.push_back((q.values[2][0] - 0.5) / 0.5);
  }
  CHECK(ks_one_sample(z, normal_cdf).p_value > 1e-3);
  CHECK_THROWS_AS(refine_bridge(p, 0.0, 0.5, {0.25}, rng), ConfigError);
}

TEST_CASE("walk on a cover has the Brownian marginal") {
  auto E = AxisSet::self_similar({1.0, 2.0, 0.5, 2});
  std::vector<double> z;
  for (int i = 0; i < 2000; ++i) {
    RngStream rng(5, stream_id(i, 0));
    double prev = 0, at = 0;
    bool ordered = true;
    walk_path_on_cover(E, 0, 1e-2, 1, rng, [&](double t, const Vec& x) {
      ordered = ordered && t >= prev;
      prev = t;
      if (std::abs(t - 1.5) < 1e-12) at = x[0];
    });
    CHECK(ordered);
    z.push_back(at / std::sqrt(1.5));
  }
  CHECK(ks_one_sample(z, normal_cdf).p_value > 1e-3);
}

TEST_CASE("positive stable Laplace transform") {
  RngStream rng(6, 0);
  const double beta = 0.5;
  double s = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) s += std::exp(-sample_positive_stable(beta, rng));
  CHECK(s / n == doctest::Approx(std::exp(-1.0)).epsilon(0.01));
  CHECK_THROWS_AS(sample_positive_stable(1.5, rng), ConfigError);
}

TEST_CASE("isotropic stable characteristic function") {
  for (double alpha : {0.5, 1.0, 1.5, 2.0})
    for (int d : {1, 2}) {
      RngStream rng(7, stream_id(static_cast<uint64_t>(alpha * 10), d));
      const int n = 40000;
      double c = 0;
      for (int i = 0; i < n; ++i) c += std::cos(0.8 * sample_isotropic_stable(alpha, d, 1.0, rng)[0]);
      double want = std::exp(-0.5 * std::pow(0.8, alpha));
      CHECK(std::abs(c / n - want) < 4.0 / std::sqrt(double(n)));
    }
}

TEST_CASE("additive field") {
  RngStream rng(8, 0);
  std::vector<double> g{1.0, 1.1, 1.2};
  auto f = sample_additive_field(1.0, 2, 2, {g, g}, rng);
  CHECK(f.vertex_count() == 9);
  auto v = f.values();
  REQUIRE(v.size() == 9);
  CHECK(v[5][0] == doctest::Approx(f.marginals[0][1][0] + f.marginals[1][2][0]));
  std::vector<double> big(1001);
  for (int i = 0; i < 1001; ++i) big[i] = 1 + i * 1e-3;
  CHECK_THROWS_AS(sample_additive_field(1.0, 2, 1, {big, big}, rng), ConfigError);
}

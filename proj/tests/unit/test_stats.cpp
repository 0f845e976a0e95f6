#include <cmath>

#include "doctest.h"
#include "thermocap/stats.hpp"

using namespace thermocap;

TEST_CASE("linear fit recovers an exact line") {
  std::vector<double> x{0, 1, 2, 3, 4}, y;
  for (double v : x) y.push_back(2.5 - 1.25 * v);
  auto f = linear_fit(x, y);
  CHECK(f.slope == doctest::Approx(-1.25).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(f.max_residual < 1e-12);
}

TEST_CASE("Clopper-Pearson edge cases") {
  // k = 0: upper bound solves (1-p)^n = (1-level)/2
  auto ci = binomial_ci(0, 10, 0.99);
  CHECK(ci.first == 0.0);
  CHECK(ci.second == doctest::Approx(1.0 - std::pow(0.005, 0.1)).epsilon(1e-9));
  auto full = binomial_ci(10, 10, 0.99);
  CHECK(full.second == 1.0);
  CHECK(full.first == doctest::Approx(std::pow(0.005, 0.1)).epsilon(1e-9));
  auto mid = binomial_ci(50, 100, 0.99);
  CHECK(mid.first < 0.5);
  CHECK(mid.second > 0.5);
}

TEST_CASE("quantiles and standard error") {
  std::vector<double> v{3, 1, 2, 5, 4};
  CHECK(quantile(v, 0.5) == doctest::Approx(3));
  CHECK(quantile(v, 0.0) == doctest::Approx(1));
  CHECK(quantile(v, 1.0) == doctest::Approx(5));
  CHECK(mean(v) == doctest::Approx(3));
  CHECK(std_error(v) == doctest::Approx(std::sqrt(2.5 / 5)));
}

TEST_CASE("two-sample KS separates shifted samples") {
  std::vector<double> a, b;
  for (int i = 0; i < 500; ++i) {
    a.push_back(i / 500.0);
    b.push_back(0.3 + i / 500.0);
  }
  CHECK(ks_two_sample(a, b).p_value < 1e-6);
  CHECK(ks_two_sample(a, a).p_value > 0.99);
}

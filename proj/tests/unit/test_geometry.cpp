#include <cmath>

#include "doctest.h"
#include "thermocap/parabolic_geometry.hpp"
#include "thermocap/rng.hpp"

using namespace thermocap;

TEST_CASE("parabolic metric") {
  SpaceTimePoint p{1.0, {0, 0, 0}}, q{1.25, {0.1, 0, 0}};
  CHECK(rho(p, q, 1) == doctest::Approx(0.5));
  q.x[0] = 0.7;
  CHECK(rho(p, q, 1) == doctest::Approx(0.7));
  CHECK(rho(p, p, 2) == 0.0);
}

TEST_CASE("box counts of simple clouds") {
  std::vector<Vec> line;
  for (int i = 0; i < 1000; ++i) line.push_back(Vec{(i + 0.5) / 1000.0, 0, 0});
  CHECK(euclid_box_count(line, 1, 0.1) == 10);
  CHECK(euclid_box_count(line, 2, 0.01) == 100);
  std::vector<SpaceTimePoint> st;
  for (int i = 0; i < 100; ++i) st.push_back({(i + 0.5) / 100.0, {0.05, 0, 0}});
  // time cells of length r^2 = 0.01, one space cell
  CHECK(parabolic_box_count(st, 1, 0.1) == 100);
}

TEST_CASE("exact-cover dim_rho slopes") {
  auto third = AxisSet::self_similar({0.0, 1.0, 1.0 / 3.0, 2});
  auto full = AxisSet::self_similar({1.0, 2.0, 0.5, 2});
  auto scales = geometric_scales(0.25, 1.0 / 3.0, 8);
  ProductSetSpec c2;
  c2.d = 2;
  c2.time = full;
  c2.space = {third, third};
  double exact = 2.0 + 2.0 * std::log(2.0) / std::log(3.0);
  CHECK(estimate_dim_rho(c2, scales).slope == doctest::Approx(exact).epsilon(0.01));
  ProductSetSpec box;
  box.d = 2;
  box.time = full;
  box.space = {AxisSet::self_similar({-1.0, 1.0, 0.5, 2}), AxisSet::self_similar({-1.0, 1.0, 0.5, 2})};
  CHECK(estimate_dim_rho(box, scales).slope == doctest::Approx(4.0).epsilon(0.01));
  ProductSetSpec pt;
  pt.d = 1;
  pt.time = AxisSet::self_similar({0.5, 1.0, 0.5, 2});
  pt.space = {AxisSet::finite({0.0})};
  CHECK(estimate_dim_rho(pt, scales).slope == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("fit trim keeps at least three scales") {
  auto s = geometric_scales(1.0, 0.5, 4);
  std::vector<double> n{1, 4, 16, 64};
  auto r = fit_box_counts(s, n, 5);
  CHECK(r.fit_hi - r.fit_lo + 1 >= 3);
  CHECK(r.slope == doctest::Approx(2.0));
  CHECK(geometric_scales(0.25, 0.5, 3) == std::vector<double>{0.25, 0.125, 0.0625});
}

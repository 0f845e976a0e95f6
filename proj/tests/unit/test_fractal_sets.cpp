#include <cmath>

#include "doctest.h"
#include "thermocap/fractal_sets.hpp"

using namespace thermocap;

namespace {
SelfSimilarSpec thirds() { return SelfSimilarSpec{0.0, 1.0, 1.0 / 3.0, 2}; }
}  // namespace

TEST_CASE("middle-thirds cover") {
  auto c1 = build_cover(thirds(), 1);
  REQUIRE(c1.size() == 2);
  CHECK(c1[0].lo == doctest::Approx(0.0));
  CHECK(c1[0].hi == doctest::Approx(1.0 / 3));
  CHECK(c1[1].lo == doctest::Approx(2.0 / 3));
  CHECK(c1[1].hi == doctest::Approx(1.0));
  auto c5 = build_cover(thirds(), 5);
  CHECK(c5.size() == 32);
  double len = 0;
  for (const auto& iv : c5) len += iv.length();
  CHECK(len == doctest::Approx(std::pow(2.0 / 3.0, 5)));
  CHECK(hausdorff_dimension(thirds()) == doctest::Approx(std::log(2.0) / std::log(3.0)));
}

TEST_CASE("full interval and centred point") {
  auto full = AxisSet::self_similar({1.0, 2.0, 0.5, 2});
  CHECK(full.full_interval());
  CHECK(full.dimension() == doctest::Approx(1.0));
  auto pt = AxisSet::self_similar({0.0, 1.0, 0.5, 1});
  CHECK(pt.degenerate());
  CHECK(pt.distance(0.75, 10) == doctest::Approx(0.25));
  auto fin = AxisSet::finite({0.0});
  CHECK(fin.degenerate());
  CHECK(fin.dimension() == 0.0);
  CHECK(fin.distance(-0.3, 0) == doctest::Approx(0.3));
}

TEST_CASE("distance to the Cantor cover") {
  auto s = thirds();
  CHECK(distance_to_set(s, 0.5, 1) == doctest::Approx(1.0 / 6));
  CHECK(distance_to_set(s, 0.5, 0) == 0.0);
  CHECK(distance_to_set(s, -0.2, 3) == doctest::Approx(0.2));
  CHECK(distance_to_set(s, 1.0 / 9 + 0.01, 2) == doctest::Approx(0.01));
  // brute force over the level-6 cover
  auto cov = build_cover(s, 6);
  for (double x : {0.05, 0.21, 0.4999, 0.73, 0.97}) {
    double best = kInf;
    for (const auto& iv : cov) best = std::min(best, x < iv.lo ? iv.lo - x : (x > iv.hi ? x - iv.hi : 0.0));
    CHECK(distance_to_set(s, x, 6) == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("invalid specs are rejected") {
  CHECK_THROWS_AS(SelfSimilarSpec({0.0, 1.0, 0.6, 2}).validate(), ConfigError);
  CHECK_THROWS_AS(SelfSimilarSpec({1.0, 0.0, 0.3, 2}).validate(), ConfigError);
  CHECK_THROWS_AS(distance_to_set(thirds(), 0.5, 41), ConfigError);
  ProductSetSpec p;
  p.d = 2;
  p.time = AxisSet::self_similar({1.0, 2.0, 0.5, 2});
  p.space = {AxisSet::self_similar(thirds())};
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("natural measures") {
  auto m = natural_measure(AxisSet::self_similar(thirds()), 3);
  REQUIRE(m.size() == 8);
  double w = 0;
  for (auto& [x, p] : m) w += p;
  CHECK(w == doctest::Approx(1.0));
  ProductSetSpec p;
  p.d = 1;
  p.time = AxisSet::self_similar({1.0, 2.0, 0.5, 2});
  p.space = {AxisSet::self_similar(thirds())};
  auto cells = natural_cells(p, 2, 3);
  CHECK(cells.size() == 4 * 8);
  CHECK(p.rho_dimension() == doctest::Approx(2.0 + std::log(2.0) / std::log(3.0)));
}

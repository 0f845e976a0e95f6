#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gsl/gsl_cdf.h>

#include "doctest.h"
#include "thermocap/experiments.hpp"

using namespace thermocap;

namespace {

json base_config() {
  return json::parse(R"({
    "kind": "hitting_probability", "d": 1,
    "set": {"time": {"ambient": [0.5, 1], "ratio": 0.5, "copies": 2}, "space": [{"points": [0]}]},
    "trials": 20, "seed": 9, "h": 1e-4, "deltas": [0.05, 0.03], "levels": {"min": 3, "max": 6}
  })");
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("config errors") {
  auto j = base_config();
  CHECK_NOTHROW(parse_config(j));
  auto bad = j;
  bad["kind"] = "nope";
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = j;
  bad["d"] = 4;
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = j;
  bad["trials"] = 0;
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = j;
  bad["set"]["space"][0] = json{{"ambient", {0, 1}}, {"ratio", 0.7}, {"copies", 2}};
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("sqrt(h) floor on delta") {
  auto c = parse_config(base_config());
  CHECK(c.effective_delta(1e-3) == doctest::Approx(3e-2));
  CHECK(c.effective_delta(0.05) == 0.05);
}

TEST_CASE("point hitting probability: arcsine law") {
  // P(W hits 0 in [a, b]) = 1 - (2/pi) arcsin(sqrt(a/b))
  for (auto [a, b] : {std::pair{0.5, 1.0}, std::pair{1.0, 4.0}, std::pair{0.2, 0.3}})
    CHECK(point_hit_probability_1d(a, b, 0.0) ==
          doctest::Approx(1 - 2 / kPi * std::asin(std::sqrt(a / b))).epsilon(1e-8));
  // from time 0 the reflection principle gives 2 P(N(0, b) > |c|)
  CHECK(point_hit_probability_1d(0.0, 2.0, 0.7) == doctest::Approx(2 * gsl_cdf_ugaussian_Q(0.7 / std::sqrt(2.0))));
}

TEST_CASE("random measure mean in closed form") {
  // F = [-1, 1], sigma = point mass at s = 1 (E = {1}): (2 pi) P(|N(0, 1 + 1/n)| <= 1)
  ProductSetSpec p;
  p.d = 1;
  p.time = AxisSet::finite({1.0});
  p.space = {AxisSet::self_similar({-1.0, 1.0, 0.5, 2})};
  for (double n : {10.0, 1000.0}) {
    double v = 1 + 1 / n;
    double want = 2 * kPi * std::erf(1 / std::sqrt(2 * v));
    CHECK(random_measure_mean(p, 0, 0, n) == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("reports are deterministic and well formed") {
  auto c = parse_config(base_config());
  auto r1 = run_experiment(c);
  auto r2 = run_experiment(c);
  CHECK(trials_csv(r1.trials) == trials_csv(r2.trials));
  auto csv = trials_csv(r1.trials);
  CHECK(csv.rfind("trial,stream,hits,dim_estimate,runtime_ms\n", 0) == 0);
  CHECK(csv.find(",\n") != std::string::npos);
  CHECK(r1.trials[0].runtime_ms >= 0.0);
  CHECK(trials_csv(r1.trials, true).find(",\n") == std::string::npos);
  CHECK(config_hash(c.raw) == config_hash(parse_config(base_config()).raw));
  auto other = base_config();
  other["seed"] = 10;
  CHECK(config_hash(parse_config(other).raw) != config_hash(c.raw));

  auto dir = std::filesystem::temp_directory_path() / "thermocap_unit_report";
  std::filesystem::remove_all(dir);
  write_report(r1, dir.string());
  CHECK(std::filesystem::exists(dir / "report.json"));
  CHECK(slurp(dir / "trials.csv") == csv);
  auto m = json::parse(slurp(dir / "manifest.json"));
  CHECK(m["seed"] == 9);
  CHECK(m["version"] == kVersion);
  auto s = summarize_report_dir(dir.string());
  CHECK(s.find("reflection_oracle") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("NaN and infinity in report JSON") {
  ExperimentReport r;
  r.config = parse_config(base_config());
  TrialRecord t;
  t.dim_estimate = std::nan("");
  r.trials = {t};
  Verdict v;
  v.name = "x";
  v.value = kInf;
  r.verdicts = {v};
  auto j = report_to_json(r);
  CHECK(j["trials"][0]["dim_estimate"].is_null());
  CHECK(j["verdicts"][0]["value"] == "inf");
  CHECK(trials_csv(r.trials).find(",nan,") != std::string::npos);
}

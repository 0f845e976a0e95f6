#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "thermocap/capacity.hpp"
#include "thermocap/fractal_sets.hpp"
#include "thermocap/parabolic_geometry.hpp"
#include "thermocap/stochastic.hpp"

namespace thermocap {

using json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

enum class ExperimentKind {
  IntersectionDim,
  HittingProbability,
  RectangleHitting,
  KaufmanCheck,
  AdditiveHitting,
  RandomMeasure,
};

std::string to_string(ExperimentKind k);
ExperimentKind parse_kind(const std::string& s);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::IntersectionDim;
  ProductSetSpec set;
  int d = 1;
  long trials = 1;
  uint64_t seed = 0;
  double h = 1e-5;      // time step of the sampled path
  double delta = 1e-2;  // membership thickness before the sqrt(h) floor
  std::vector<double> scales;
  GammaGrid gamma_grid;
  LevelRange levels;
  std::string out_dir = "out";

  // optional
  int time_level = -1;          // E cover level used for path sampling (-1: auto)
  std::vector<double> deltas;   // several thicknesses (hitting experiments)
  double alpha = 0.5;           // additive field
  int N = 1;
  double field_step = 1e-4;     // additive field grid step on [1, 3/2]^N
  std::vector<double> ns{10, 100, 1000, 10000};  // random measure
  int sigma_level = 6;          // natural measure on E for the random measure
  int min_hits = 100;           // hit-rich threshold (Kaufman)
  int trim = 1;                 // box-count fit trim for hit clouds
  bool capacity_side = false;   // attach Delta from estimate_delta
  bool record_runtime = false;  // wall-clock runtime_ms in trials.csv (breaks byte equality)
  json raw;                     // echo of the parsed document

  void validate() const;
  // sqrt(h) floor: delta_eff = max(delta, 3 sqrt(h))
  double effective_delta(double dlt) const;
};

ExperimentConfig parse_config(const json& j);
ExperimentConfig load_config(const std::string& file);
json axis_to_json(const AxisSet& a);
AxisSet axis_from_json(const json& j);

struct TrialRecord {
  long trial = 0;
  uint64_t stream = 0;
  long hits = 0;
  double dim_estimate = 0.0;  // NaN when undefined (no hits)
  double runtime_ms = 0.0;
  json extra;  // kind-specific values, written to report.json only
};

struct Verdict {
  std::string name;
  double value = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;
};

struct PlotSeries {
  std::string file;  // relative to out_dir
  std::string title;
  std::string xlabel, ylabel;
  std::vector<double> x, y;  // positive data, drawn on log-log axes
  double slope = 0.0, intercept = 0.0;  // fitted line in log-log
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<TrialRecord> trials;
  json aggregates = json::object();
  json capacity = json::object();
  std::vector<Verdict> verdicts;
  std::vector<PlotSeries> plots;
  std::vector<std::string> notes;

  const Verdict* verdict(const std::string& name) const;
};

// Level of the E cover used for path sampling: 0 for full intervals, else the
// deepest level whose cells still hold >= 16 steps of size h (at most 20).
int sampling_cover_level(const AxisSet& E, double h, int requested = -1);

// Brownian path on the E cover: coarse values at cell ends, then a bridge with
// step <= h inside each cell, sampled left to right. Calls visit(t, x) in time order.
template <class Visit>
void walk_path_on_cover(const AxisSet& E, int cover_level, double h, int d, RngStream& rng, Visit&& visit) {
  auto cells = E.cover(cover_level);
  std::vector<double> ends;
  for (const auto& c : cells) {
    ends.push_back(c.lo);
    if (c.hi > c.lo) ends.push_back(c.hi);
  }
  std::sort(ends.begin(), ends.end());
  ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
  BrownianPath coarse = sample_brownian(ends, d, rng);
  auto at = [&](double t) {
    return static_cast<std::size_t>(std::lower_bound(ends.begin(), ends.end(), t) - ends.begin());
  };
  for (const auto& c : cells) {
    std::size_t i0 = at(c.lo);
    if (!(c.hi > c.lo)) {
      visit(c.lo, coarse.values[i0]);
      continue;
    }
    const Vec& x1 = coarse.values[at(c.hi)];
    long k = static_cast<long>(std::ceil((c.hi - c.lo) / h - 1e-9));
    double dt = (c.hi - c.lo) / static_cast<double>(k);
    // sequential bridge: each step conditioned on the current value and x1
    Vec x = coarse.values[i0];
    visit(c.lo, x);
    for (long j = 1; j < k; ++j) {
      double rest = (c.hi - c.lo) - static_cast<double>(j - 1) * dt;
      double lam = dt / rest;
      double sd = std::sqrt(dt * (rest - dt) / rest);
      for (int q = 0; q < d; ++q) x[q] += lam * (x1[q] - x[q]) + sd * rng.normal();
      visit(c.lo + static_cast<double>(j) * dt, x);
    }
    visit(c.hi, x1);
  }
}

ExperimentReport run_intersection_dim(const ExperimentConfig& c);
ExperimentReport run_hitting_probability(const ExperimentConfig& c);
ExperimentReport run_rectangle_hitting(const ExperimentConfig& c);
ExperimentReport run_kaufman_check(const ExperimentConfig& c);
ExperimentReport run_additive_hitting(const ExperimentConfig& c);
ExperimentReport run_random_measure(const ExperimentConfig& c);
ExperimentReport run_experiment(const ExperimentConfig& c);

// P(W hits the point c during [a, b]) in d = 1, by quadrature over W(a).
double point_hit_probability_1d(double a, double b, double c);

// Exact E||nu_n|| for the product F cover at `space_level` and the natural
// measure on E at `sigma_level`, by quadrature over F.
double random_measure_mean(const ProductSetSpec& set, int sigma_level, int space_level, double n);

json delta_to_json(const DeltaEstimate& est);
json box_report_json(const BoxCountReport& r);
PlotSeries box_plot(const BoxCountReport& r, const std::string& file, const std::string& title);

// ---- output -------------------------------------------------------------------

json report_to_json(const ExperimentReport& r);
// runtime_ms is left empty unless with_runtime is set.
std::string trials_csv(const std::vector<TrialRecord>& trials, bool with_runtime = false);
std::string config_hash(const json& config);
// Writes report.json, trials.csv, manifest.json and the SVG plots.
void write_report(const ExperimentReport& r, const std::string& dir);
void write_svg_loglog(const PlotSeries& p, const std::string& file);
// Short text summary of a written report directory.
std::string summarize_report_dir(const std::string& dir);

}  // namespace thermocap

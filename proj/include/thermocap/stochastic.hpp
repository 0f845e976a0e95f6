#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "thermocap/common.hpp"
#include "thermocap/rng.hpp"

namespace thermocap {

struct BrownianPath {
  int d = 1;
  std::vector<double> times;  // strictly increasing
  std::vector<Vec> values;
  uint64_t seed = 0;
  uint64_t stream = 0;

  std::size_t size() const { return times.size(); }
};

// Exact Gaussian increments from W(0) = 0 (the first increment covers [0, t0]).
BrownianPath sample_brownian(const std::vector<double>& times, int d, RngStream& rng);

// Insert `new_times` inside [s, t] (both already on the grid) with the bridge
// law given the path values at the neighbouring grid times.
BrownianPath refine_bridge(const BrownianPath& path, double s, double t,
                           std::vector<double> new_times, RngStream& rng);

// Positive (beta)-stable draw with Laplace transform exp(-lambda^beta), beta in (0,1].
double sample_positive_stable(double beta, RngStream& rng);

// Isotropic alpha-stable vector with characteristic function exp(-t ||xi||^alpha / 2).
Vec sample_isotropic_stable(double alpha, int d, double t_total, RngStream& rng);

// Stable process X(0) = 0 observed at increasing times.
std::vector<Vec> sample_stable_path(double alpha, int d, const std::vector<double>& times,
                                    RngStream& rng);

struct AdditiveStableField {
  double alpha = 2.0;
  int N = 1;
  int d = 1;
  std::vector<std::vector<double>> grids;    // per axis
  std::vector<std::vector<Vec>> marginals;   // X^{(k)} on grid k
  uint64_t seed = 0;
  uint64_t stream = 0;

  std::size_t vertex_count() const;
  // X(t) = sum_k X^{(k)}(t_k) at the vertex with per-axis indices idx.
  Vec value(const std::vector<std::size_t>& idx) const;
  // All vertex values in row-major order (last axis fastest).
  std::vector<Vec> values() const;
};

inline constexpr std::size_t kMaxFieldVertices = 1'000'000;

AdditiveStableField sample_additive_field(double alpha, int N, int d,
                                          const std::vector<std::vector<double>>& grids,
                                          RngStream& rng);

void write_path_csv(const std::string& file, const BrownianPath& path);

}  // namespace thermocap

#include "thermocap/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace thermocap {

namespace {

void check_sorted(const std::vector<double>& t, const char* what) {
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1])) throw ConfigError(std::string(what) + ": times must be strictly increasing");
}

}  // namespace

BrownianPath sample_brownian(const std::vector<double>& times, int d, RngStream& rng) {
  require_dim(d);
  check_sorted(times, "sample_brownian");
  if (!times.empty() && times.front() < 0) throw ConfigError("sample_brownian: negative time");
  BrownianPath p;
  p.d = d;
  p.times = times;
  p.values.resize(times.size());
  p.seed = rng.seed();
  p.stream = rng.stream();
  Vec cur{};
  double prev = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    double sd = std::sqrt(times[i] - prev);
    for (int k = 0; k < d; ++k) cur[k] += sd * rng.normal();
    p.values[i] = cur;
    prev = times[i];
  }
  return p;
}

BrownianPath refine_bridge(const BrownianPath& path, double s, double t, std::vector<double> new_times,
                           RngStream& rng) {
  auto is = std::lower_bound(path.times.begin(), path.times.end(), s);
  auto it = std::lower_bound(path.times.begin(), path.times.end(), t);
  if (is == path.times.end() || *is != s || it == path.times.end() || *it != t || !(s < t))
    throw ConfigError("refine_bridge: interval ends must be grid times");
  std::sort(new_times.begin(), new_times.end());
  for (double u : new_times)
    if (!(u > s && u < t)) throw ConfigError("refine_bridge: new time outside the interval");
  std::size_t i0 = is - path.times.begin(), i1 = it - path.times.begin();

  // merged interior times; existing ones keep their values
  std::vector<double> merged;
  std::vector<int> known;  // index into path or -1
  {
    std::size_t a = i0 + 1, b = 0;
    while (a < i1 || b < new_times.size()) {
      if (b == new_times.size() || (a < i1 && path.times[a] <= new_times[b])) {
        if (b < new_times.size() && path.times[a] == new_times[b]) ++b;
        merged.push_back(path.times[a]);
        known.push_back(static_cast<int>(a++));
      } else {
        if (merged.empty() || merged.back() != new_times[b]) {
          merged.push_back(new_times[b]);
          known.push_back(-1);
        }
        ++b;
      }
    }
  }
  // next known position to the right (merged.size() means t)
  std::vector<std::size_t> next(merged.size());
  for (std::size_t j = merged.size(), r = merged.size(); j-- > 0;) {
    next[j] = r;
    if (known[j] >= 0) r = j;
  }
  std::vector<Vec> vals(merged.size());
  double ls = s;
  Vec lv = path.values[i0];
  for (std::size_t j = 0; j < merged.size(); ++j) {
    if (known[j] >= 0) {
      vals[j] = path.values[known[j]];
      ls = merged[j];
      lv = vals[j];
      continue;
    }
    // next known value to the right
    std::size_t r = next[j];
    double rt = r < merged.size() ? merged[r] : t;
    const Vec& rv = r < merged.size() ? path.values[known[r]] : path.values[i1];
    double u = merged[j];
    double lam = (u - ls) / (rt - ls);
    double sd = std::sqrt((u - ls) * (rt - u) / (rt - ls));
    Vec v{};
    for (int k = 0; k < path.d; ++k) v[k] = lv[k] + lam * (rv[k] - lv[k]) + sd * rng.normal();
    vals[j] = v;
    ls = u;
    lv = v;
  }

  BrownianPath out;
  out.d = path.d;
  out.seed = path.seed;
  out.stream = path.stream;
  out.times.assign(path.times.begin(), path.times.begin() + i0 + 1);
  out.values.assign(path.values.begin(), path.values.begin() + i0 + 1);
  out.times.insert(out.times.end(), merged.begin(), merged.end());
  out.values.insert(out.values.end(), vals.begin(), vals.end());
  out.times.insert(out.times.end(), path.times.begin() + i1, path.times.end());
  out.values.insert(out.values.end(), path.values.begin() + i1, path.values.end());
  return out;
}

// Kanter's representation, as used in the Chambers-Mallows-Stuck generator.
double sample_positive_stable(double beta, RngStream& rng) {
  if (!(beta > 0.0 && beta <= 1.0)) throw ConfigError("positive stable index must lie in (0,1]");
  if (beta == 1.0) return 1.0;
  double u = kPi * rng.uniform();
  double e = rng.exponential();
  double a = std::sin(beta * u) / std::pow(std::sin(u), 1.0 / beta);
  double b = std::pow(std::sin((1.0 - beta) * u) / e, (1.0 - beta) / beta);
  return a * b;
}

Vec sample_isotropic_stable(double alpha, int d, double t_total, RngStream& rng) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw ConfigError("alpha must lie in (0,2]");
  require_dim(d);
  // X = sqrt(S) Z: E exp(i xi.X) = E exp(-S |xi|^2 / 2) = exp(-(c |xi|^2 / 2)^beta)
  // with S = c S0, beta = alpha/2; c^beta 2^{-beta} = 1/2 gives c = 2^{(beta-1)/beta}.
  double beta = 0.5 * alpha;
  double S = 1.0;
  if (alpha < 2.0) S = std::pow(2.0, (beta - 1.0) / beta) * sample_positive_stable(beta, rng);
  double scale = std::pow(t_total, 1.0 / alpha) * std::sqrt(S);
  Vec x{};
  for (int k = 0; k < d; ++k) x[k] = scale * rng.normal();
  return x;
}

std::vector<Vec> sample_stable_path(double alpha, int d, const std::vector<double>& times, RngStream& rng) {
  check_sorted(times, "sample_stable_path");
  std::vector<Vec> out(times.size());
  Vec cur{};
  double prev = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    double dt = times[i] - prev;
    if (dt < 0) throw ConfigError("sample_stable_path: negative time");
    if (dt > 0) {
      Vec inc = sample_isotropic_stable(alpha, d, dt, rng);
      for (int k = 0; k < d; ++k) cur[k] += inc[k];
    }
    out[i] = cur;
    prev = times[i];
  }
  return out;
}

std::size_t AdditiveStableField::vertex_count() const {
  std::size_t n = 1;
  for (const auto& g : grids) n *= g.size();
  return n;
}

Vec AdditiveStableField::value(const std::vector<std::size_t>& idx) const {
  Vec v{};
  for (int k = 0; k < N; ++k)
    for (int j = 0; j < d; ++j) v[j] += marginals[k][idx[k]][j];
  return v;
}

std::vector<Vec> AdditiveStableField::values() const {
  std::vector<Vec> out;
  out.reserve(vertex_count());
  std::vector<std::size_t> idx(N, 0);
  const std::size_t total = vertex_count();
  for (std::size_t c = 0; c < total; ++c) {
    out.push_back(value(idx));
    for (int k = N - 1; k >= 0; --k) {
      if (++idx[k] < grids[k].size()) break;
      idx[k] = 0;
    }
  }
  return out;
}

AdditiveStableField sample_additive_field(double alpha, int N, int d,
                                          const std::vector<std::vector<double>>& grids, RngStream& rng) {
  if (N < 1 || static_cast<int>(grids.size()) != N) throw ConfigError("need one grid per parameter axis");
  require_dim(d);
  double total = 1.0;
  for (const auto& g : grids) {
    if (g.empty()) throw ConfigError("empty axis grid");
    total *= static_cast<double>(g.size());
  }
  if (total > static_cast<double>(kMaxFieldVertices)) throw ConfigError("additive field grid above 1e6 vertices");
  AdditiveStableField f;
  f.alpha = alpha;
  f.N = N;
  f.d = d;
  f.grids = grids;
  f.seed = rng.seed();
  f.stream = rng.stream();
  for (int k = 0; k < N; ++k) f.marginals.push_back(sample_stable_path(alpha, d, grids[k], rng));
  return f;
}

void write_path_csv(const std::string& file, const BrownianPath& path) {
  std::ofstream out(file);
  if (!out) throw ConfigError("cannot write " + file);
  out << "t";
  for (int k = 0; k < path.d; ++k) out << ",x" << k + 1;
  out << "\n";
  out.precision(17);
  for (std::size_t i = 0; i < path.size(); ++i) {
    out << path.times[i];
    for (int k = 0; k < path.d; ++k) out << "," << path.values[i][k];
    out << "\n";
  }
}

}  // namespace thermocap

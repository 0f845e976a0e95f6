#include "thermocap/parabolic_geometry.hpp"

#include <algorithm>
#include <cmath>

#include "thermocap/stats.hpp"

namespace thermocap {

double rho(const SpaceTimePoint& p, const SpaceTimePoint& q, int d) {
  return std::max(std::sqrt(std::abs(p.t - q.t)), dist(p.x, q.x, d));
}

namespace {

// Grid coordinate with values within 1e-9 of a grid line snapped onto it.
double snapped(double x, double s, double offset) {
  double q = x / s - offset;
  double rq = std::round(q);
  if (std::abs(q - rq) < 1e-9 * std::max(1.0, std::abs(q))) return rq;
  return q;
}

template <std::size_t K>
uint64_t count_distinct(std::vector<std::array<int64_t, K>>& keys) {
  std::sort(keys.begin(), keys.end());
  return static_cast<uint64_t>(std::unique(keys.begin(), keys.end()) - keys.begin());
}

}  // namespace

uint64_t parabolic_box_count(const std::vector<SpaceTimePoint>& points, int d, double r) {
  require_dim(d);
  if (!(r > 0)) throw ConfigError("box size must be positive");
  std::vector<std::array<int64_t, kMaxDim + 1>> keys;
  keys.reserve(points.size());
  for (const auto& p : points) {
    std::array<int64_t, kMaxDim + 1> k{};
    k[0] = static_cast<int64_t>(std::floor(snapped(p.t, r * r, 0.0)));
    for (int i = 0; i < d; ++i) k[i + 1] = static_cast<int64_t>(std::floor(snapped(p.x[i], r, 0.0)));
    keys.push_back(k);
  }
  return count_distinct(keys);
}

uint64_t euclid_box_count(const std::vector<Vec>& points, int d, double r, double offset) {
  require_dim(d);
  if (!(r > 0)) throw ConfigError("box size must be positive");
  std::vector<std::array<int64_t, kMaxDim>> keys;
  keys.reserve(points.size());
  for (const auto& p : points) {
    std::array<int64_t, kMaxDim> k{};
    for (int i = 0; i < d; ++i) k[i] = static_cast<int64_t>(std::floor(snapped(p[i], r, offset)));
    keys.push_back(k);
  }
  return count_distinct(keys);
}

uint64_t axis_grid_count(const AxisSet& axis, double s, double offset, bool* approximate) {
  if (!(s > 0)) throw ConfigError("grid size must be positive");
  std::vector<Interval> cells;
  if (axis.degenerate() || axis.full_interval()) {
    cells = axis.cover(0);
  } else {
    const auto& sp = axis.spec;
    int level = 0;
    while (sp.cell_length(level) > 0.25 * s && level < sp.level_cap &&
           axis.cell_count(level + 1) <= 4'000'000)
      ++level;
    if (sp.cell_length(level) > 0.25 * s && approximate) *approximate = true;
    cells = axis.cover(level);
  }
  uint64_t count = 0;
  int64_t last = INT64_MIN;
  for (const auto& c : cells) {
    int64_t k0, k1;
    if (c.hi > c.lo) {
      k0 = static_cast<int64_t>(std::floor(snapped(c.lo, s, offset)));
      k1 = static_cast<int64_t>(std::ceil(snapped(c.hi, s, offset))) - 1;
      k1 = std::max(k1, k0);
    } else {
      k0 = k1 = static_cast<int64_t>(std::floor(snapped(c.lo, s, offset)));
    }
    int64_t start = std::max(k0, last == INT64_MIN ? k0 : last + 1);
    if (k1 >= start) count += static_cast<uint64_t>(k1 - start + 1);
    last = std::max(last, k1);
  }
  return count;
}

BoxCountReport fit_box_counts(std::vector<double> scales, std::vector<double> counts, int trim) {
  const int n = static_cast<int>(scales.size());
  if (n < 3) throw ConfigError("box counting needs at least 3 scales");
  BoxCountReport rep;
  rep.scales = std::move(scales);
  rep.counts = std::move(counts);
  while (trim > 0 && n - 2 * trim < 3) --trim;
  rep.fit_lo = trim;
  rep.fit_hi = n - 1 - trim;
  std::vector<double> lx, ly;
  for (int i = rep.fit_lo; i <= rep.fit_hi; ++i) {
    lx.push_back(std::log(1.0 / rep.scales[i]));
    ly.push_back(std::log(std::max(rep.counts[i], 1.0)));
  }
  auto f = linear_fit(lx, ly);
  rep.slope = f.slope;
  rep.intercept = f.intercept;
  rep.residual = f.max_residual;
  return rep;
}

namespace {

void check_scales(std::vector<double>& scales) {
  if (scales.size() < 3) throw ConfigError("degenerate scale range: need at least 3 scales");
  std::sort(scales.begin(), scales.end(), std::greater<>());
  for (double r : scales)
    if (!(r > 0)) throw ConfigError("scales must be positive");
  if (std::log10(scales.front() / scales.back()) < 1.5 - 1e-9)
    throw ConfigError("degenerate scale range: must span at least 1.5 decades");
}

}  // namespace

BoxCountReport estimate_dim_rho(const ProductSetSpec& product, std::vector<double> scales,
                                int trim, double offset) {
  product.validate();
  check_scales(scales);
  std::vector<double> counts;
  bool approx = false;
  for (double r : scales) {
    double n = static_cast<double>(axis_grid_count(product.time, r * r, offset, &approx));
    for (const auto& s : product.space) n *= static_cast<double>(axis_grid_count(s, r, offset, &approx));
    counts.push_back(n);
  }
  auto rep = fit_box_counts(std::move(scales), std::move(counts), trim);
  rep.approximate = approx;
  return rep;
}

BoxCountReport euclid_box_count_dim(const std::vector<Vec>& points, int d,
                                    std::vector<double> scales, int trim, double offset) {
  check_scales(scales);
  std::vector<double> counts;
  for (double r : scales) counts.push_back(static_cast<double>(euclid_box_count(points, d, r, offset)));
  return fit_box_counts(std::move(scales), std::move(counts), trim);
}

std::vector<double> geometric_scales(double r0, double factor, int n) {
  std::vector<double> s;
  double r = r0;
  for (int i = 0; i < n; ++i, r *= factor) s.push_back(r);
  return s;
}

}  // namespace thermocap

#include "thermocap/fractal_sets.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace thermocap {

namespace {

// Offset of child j inside a unit parent.
double child_offset(int copies, double ratio, int j) {
  if (copies == 1) return 0.5 * (1.0 - ratio);
  return j * (1.0 - ratio) / (copies - 1);
}

uint64_t checked_pow(uint64_t base, int level) {
  uint64_t n = 1;
  for (int i = 0; i < level; ++i) {
    if (base != 0 && n > kMaxAtoms * 16 / base) return kMaxAtoms * 16;
    n *= base;
  }
  return n;
}

}  // namespace

void SelfSimilarSpec::validate() const {
  std::ostringstream err;
  if (!(b >= a)) err << "ambient interval needs a <= b; ";
  if (!(ratio > 0.0 && ratio <= 0.5 + 1e-15) && !(copies == 1 && ratio > 0.0 && ratio < 1.0))
    err << "ratio must lie in (0, 1/2]; ";
  if (copies < 1) err << "copies must be >= 1; ";
  if (copies * ratio > 1.0 + 1e-12) err << "copies * ratio must be <= 1; ";
  if (level_cap < 0) err << "level cap must be >= 0; ";
  if (!err.str().empty()) throw ConfigError("invalid self-similar spec: " + err.str());
}

bool SelfSimilarSpec::full_interval() const {
  return copies >= 2 && std::abs(copies * ratio - 1.0) < 1e-12;
}

double SelfSimilarSpec::cell_length(int level) const {
  return (b - a) * std::pow(ratio, level);
}

double SelfSimilarSpec::cell_left(int level, uint64_t index) const {
  // digits, most significant first
  double left = a;
  double len = b - a;
  uint64_t div = 1;
  for (int k = 1; k < level; ++k) div *= static_cast<uint64_t>(copies);
  for (int k = 0; k < level; ++k) {
    int digit = static_cast<int>((index / div) % copies);
    left += len * child_offset(copies, ratio, digit);
    len *= ratio;
    if (div > 1) div /= copies;
  }
  return left;
}

double hausdorff_dimension(const SelfSimilarSpec& spec) {
  spec.validate();
  if (spec.copies == 1) return 0.0;
  return std::log(static_cast<double>(spec.copies)) / std::log(1.0 / spec.ratio);
}

std::vector<Interval> build_cover(const SelfSimilarSpec& spec, int level) {
  spec.validate();
  if (level < 0 || level > spec.level_cap) {
    std::ostringstream os;
    os << "level " << level << " exceeds level cap " << spec.level_cap;
    throw ConfigError(os.str());
  }
  uint64_t n = checked_pow(static_cast<uint64_t>(spec.copies), level);
  if (n > kMaxAtoms) throw ConfigError("cover at this level has more than 1e7 intervals");
  std::vector<Interval> out;
  out.reserve(n);
  double len = spec.cell_length(level);
  for (uint64_t i = 0; i < n; ++i) {
    double lo = spec.cell_left(level, i);
    out.push_back({lo, lo + len});
  }
  return out;
}

namespace {

double distance_unchecked(const SelfSimilarSpec& spec, double x, int level) {
  double lo = spec.a;
  double len = spec.b - spec.a;
  if (spec.full_interval()) level = 0;
  if (spec.copies == 1) {
    for (int k = 0; k < level; ++k) {
      lo += len * child_offset(1, spec.ratio, 0);
      len *= spec.ratio;
    }
    if (x < lo) return lo - x;
    if (x > lo + len) return x - lo - len;
    return 0.0;
  }
  if (x < lo) return lo - x;
  if (x > lo + len) return x - lo - len;
  for (int k = 0; k < level; ++k) {
    double c = len * spec.ratio;
    double prev_hi = -kInf;
    bool found = false;
    for (int j = 0; j < spec.copies; ++j) {
      double cl = lo + len * child_offset(spec.copies, spec.ratio, j);
      if (x < cl) {
        // x sits in the gap between child j-1 and child j
        return std::min(x - prev_hi, cl - x);
      }
      if (x <= cl + c) {
        lo = cl;
        found = true;
        break;
      }
      prev_hi = cl + c;
    }
    if (!found) return x - prev_hi;  // rounding past the last child
    len = c;
  }
  return 0.0;
}

}  // namespace

double distance_to_set(const SelfSimilarSpec& spec, double x, int level) {
  spec.validate();
  if (level > spec.level_cap) throw ConfigError("level exceeds level cap");
  return distance_unchecked(spec, x, level);
}

AxisSet AxisSet::self_similar(SelfSimilarSpec s) {
  s.validate();
  AxisSet a;
  a.kind = Kind::SelfSimilar;
  a.spec = s;
  return a;
}

AxisSet AxisSet::finite(std::vector<double> pts) {
  if (pts.empty()) throw ConfigError("finite point set must be non-empty");
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  AxisSet a;
  a.kind = Kind::Points;
  a.points = std::move(pts);
  return a;
}

void AxisSet::validate() const {
  if (kind == Kind::SelfSimilar)
    spec.validate();
  else if (points.empty())
    throw ConfigError("finite point set must be non-empty");
}

bool AxisSet::degenerate() const {
  return kind == Kind::Points || spec.copies == 1;
}

bool AxisSet::full_interval() const {
  return kind == Kind::SelfSimilar && spec.full_interval();
}

double AxisSet::dimension() const {
  return kind == Kind::Points ? 0.0 : hausdorff_dimension(spec);
}

double AxisSet::lo() const {
  if (kind == Kind::Points) return points.front();
  if (spec.copies == 1) return 0.5 * (spec.a + spec.b);
  return spec.a;
}

double AxisSet::hi() const {
  if (kind == Kind::Points) return points.back();
  if (spec.copies == 1) return 0.5 * (spec.a + spec.b);
  return spec.b;
}

std::vector<Interval> AxisSet::cover(int level) const {
  if (kind == Kind::Points) {
    std::vector<Interval> out;
    for (double p : points) out.push_back({p, p});
    return out;
  }
  if (spec.copies == 1) {
    double c = 0.5 * (spec.a + spec.b);
    return {{c, c}};
  }
  return build_cover(spec, level);
}

uint64_t AxisSet::cell_count(int level) const {
  if (kind == Kind::Points) return points.size();
  if (spec.copies == 1) return 1;
  return checked_pow(static_cast<uint64_t>(spec.copies), level);
}

double AxisSet::cell_length(int level) const {
  if (degenerate()) return 0.0;
  return spec.cell_length(level);
}

double AxisSet::distance(double x, int level) const {
  if (kind == Kind::Points) {
    auto it = std::lower_bound(points.begin(), points.end(), x);
    double best = kInf;
    if (it != points.end()) best = *it - x;
    if (it != points.begin()) best = std::min(best, x - *(it - 1));
    return best;
  }
  if (spec.copies == 1) return std::abs(x - 0.5 * (spec.a + spec.b));
  return distance_unchecked(spec, x, std::min(level, spec.level_cap));
}

void ProductSetSpec::validate() const {
  require_dim(d);
  time.validate();
  if (static_cast<int>(space.size()) != d)
    throw ConfigError("space list length must equal d");
  for (const auto& s : space) s.validate();
  if (!(time.lo() > 0.0)) throw ConfigError("time set must lie in (0, inf)");
}

double ProductSetSpec::space_dimension() const {
  double s = 0.0;
  for (const auto& a : space) s += a.dimension();
  return s;
}

double ProductSetSpec::rho_dimension() const { return 2.0 * time.dimension() + space_dimension(); }

double ProductSetSpec::distance_to_space(const Vec& x, int level) const {
  double s = 0.0;
  for (int i = 0; i < d; ++i) {
    double u = space[i].distance(x[i], level);
    s += u * u;
  }
  return std::sqrt(s);
}

std::vector<std::pair<double, double>> natural_measure(const AxisSet& axis, int level) {
  auto cells = axis.cover(level);
  std::vector<std::pair<double, double>> out;
  out.reserve(cells.size());
  double w = 1.0 / static_cast<double>(cells.size());
  for (const auto& c : cells) out.emplace_back(c.mid(), w);
  return out;
}

namespace {

uint64_t product_count(const ProductSetSpec& p, int tl, int sl) {
  long double n = static_cast<long double>(p.time.cell_count(tl));
  for (const auto& s : p.space) n *= static_cast<long double>(s.cell_count(sl));
  if (n > static_cast<long double>(kMaxAtoms)) return kMaxAtoms + 1;
  return static_cast<uint64_t>(n);
}

// Iterates over the product grid of per-axis covers in row-major order.
template <class F>
void for_each_product(const ProductSetSpec& p, int tl, int sl, F&& f) {
  auto tc = p.time.cover(tl);
  std::vector<std::vector<Interval>> sc;
  for (const auto& s : p.space) sc.push_back(s.cover(sl));
  std::array<std::size_t, kMaxDim> idx{};
  for (const auto& ti : tc) {
    idx.fill(0);
    while (true) {
      Cell c;
      c.t = ti;
      for (int i = 0; i < p.d; ++i) c.x[i] = sc[i][idx[i]];
      f(c);
      int k = p.d - 1;
      while (k >= 0 && ++idx[k] == sc[k].size()) idx[k--] = 0;
      if (k < 0) break;
    }
  }
}

}  // namespace

DiscreteMeasure natural_measure(const ProductSetSpec& product, int time_level, int space_level) {
  product.validate();
  uint64_t n = product_count(product, time_level, space_level);
  if (n > kMaxAtoms) throw ConfigError("natural measure would exceed 1e7 atoms");
  DiscreteMeasure m;
  m.d = product.d;
  m.atoms.reserve(n);
  for_each_product(product, time_level, space_level,
                   [&](const Cell& c) { m.atoms.push_back(c.center(product.d)); });
  m.weights.assign(m.atoms.size(), 1.0 / static_cast<double>(m.atoms.size()));
  return m;
}

CellMeasure natural_cells(const ProductSetSpec& product, int time_level, int space_level) {
  product.validate();
  uint64_t n = product_count(product, time_level, space_level);
  if (n > kMaxAtoms) throw ConfigError("cell measure would exceed 1e7 cells");
  CellMeasure m;
  m.d = product.d;
  m.cells.reserve(n);
  for_each_product(product, time_level, space_level,
                   [&](const Cell& c) { m.cells.push_back(c); });
  m.weights.assign(m.cells.size(), 1.0 / static_cast<double>(m.cells.size()));
  return m;
}

bool DiscreteMeasure::diffuse_proxy() const {
  std::vector<double> ts;
  ts.reserve(atoms.size());
  for (const auto& a : atoms) ts.push_back(a.t);
  std::sort(ts.begin(), ts.end());
  return std::adjacent_find(ts.begin(), ts.end()) == ts.end();
}

void DiscreteMeasure::validate() const {
  if (atoms.size() != weights.size()) throw ConfigError("atoms and weights differ in length");
  double s = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ConfigError("negative weight");
    s += w;
  }
  if (std::abs(s - 1.0) > 1e-12) throw ConfigError("weights must sum to 1");
}

}  // namespace thermocap

#pragma once

#include <vector>

#include "thermocap/common.hpp"

namespace thermocap {

// Weighted atoms on the probability simplex.
struct DiscreteMeasure {
  int d = 1;
  std::vector<SpaceTimePoint> atoms;
  std::vector<double> weights;

  std::size_t size() const { return atoms.size(); }
  // True iff all atom times are pairwise distinct.
  bool diffuse_proxy() const;
  // Throws ConfigError if weights are negative or do not sum to 1 within 1e-12.
  void validate() const;
};

// Closed interval; lo == hi is a degenerate (point) interval.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
};

// Space-time cell carrying the uniform probability measure on
// [t.lo, t.hi] x prod_i [x[i].lo, x[i].hi]. Degenerate sides are allowed.
struct Cell {
  Interval t;
  std::array<Interval, kMaxDim> x{};
  SpaceTimePoint center(int d) const {
    SpaceTimePoint p;
    p.t = t.mid();
    for (int i = 0; i < d; ++i) p.x[i] = x[i].mid();
    return p;
  }
};

// Weighted cells: a piecewise-uniform probability measure.
struct CellMeasure {
  int d = 1;
  std::vector<Cell> cells;
  std::vector<double> weights;
  std::size_t size() const { return cells.size(); }
};

}  // namespace thermocap

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "thermocap/measure.hpp"

namespace thermocap {

// 1-D self-similar set in [a,b]: `copies` images of ratio `ratio`, evenly
// spaced with the first flush left and the last flush right. copies == 1
// puts the single image in the middle, so the limit set is {(a+b)/2}.
struct SelfSimilarSpec {
  double a = 0.0;
  double b = 1.0;
  double ratio = 1.0 / 3.0;
  int copies = 2;
  int level_cap = 40;

  void validate() const;
  bool full_interval() const;  // copies * ratio == 1
  double cell_length(int level) const;
  // Left end of the cell with base-`copies` digits given by `index`.
  double cell_left(int level, uint64_t index) const;
};

// One coordinate axis of a product set: a self-similar spec or a finite point set.
struct AxisSet {
  enum class Kind { SelfSimilar, Points };
  Kind kind = Kind::SelfSimilar;
  SelfSimilarSpec spec;
  std::vector<double> points;  // sorted, used when kind == Points

  static AxisSet self_similar(SelfSimilarSpec s);
  static AxisSet finite(std::vector<double> pts);

  void validate() const;
  // Reduces to finitely many points (explicit point set or copies == 1).
  bool degenerate() const;
  bool full_interval() const;
  double dimension() const;
  double lo() const;
  double hi() const;
  // Cells at the given level (points give degenerate intervals).
  std::vector<Interval> cover(int level) const;
  uint64_t cell_count(int level) const;
  double cell_length(int level) const;
  double distance(double x, int level) const;
};

struct ProductSetSpec {
  AxisSet time;
  std::vector<AxisSet> space;
  int d = 1;

  void validate() const;
  // Sum of the axis dimensions of F.
  double space_dimension() const;
  // dim_rho(E x F) for self-similar products: 2 dim E + dim F.
  double rho_dimension() const;
  // Euclidean distance from x to the level-n cover of F.
  double distance_to_space(const Vec& x, int level) const;
};

std::vector<Interval> build_cover(const SelfSimilarSpec& spec, int level);
double hausdorff_dimension(const SelfSimilarSpec& spec);
double distance_to_set(const SelfSimilarSpec& spec, double x, int level);

// Uniform weights on the cell midpoints (1-D).
std::vector<std::pair<double, double>> natural_measure(const AxisSet& axis, int level);

// Product natural measure on the grid of midpoints. Refuses more than 1e7 atoms.
DiscreteMeasure natural_measure(const ProductSetSpec& product, int time_level, int space_level);

// Same product, but each atom is the whole (time cell x space cell) with the
// uniform measure on it.
CellMeasure natural_cells(const ProductSetSpec& product, int time_level, int space_level);

inline constexpr uint64_t kMaxAtoms = 10'000'000;

}  // namespace thermocap

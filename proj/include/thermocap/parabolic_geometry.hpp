#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "thermocap/fractal_sets.hpp"

namespace thermocap {

// max(|t-s|^{1/2}, ||x-y||)
double rho(const SpaceTimePoint& p, const SpaceTimePoint& q, int d);

// Occupied cells of the grid [k r^2, (k+1) r^2) x (r-cubes), anchored at 0.
uint64_t parabolic_box_count(const std::vector<SpaceTimePoint>& points, int d, double r);

// Occupied isotropic cubes of side r, anchored at `offset * r`.
uint64_t euclid_box_count(const std::vector<Vec>& points, int d, double r, double offset = 0.0);

struct BoxCountReport {
  std::vector<double> scales;  // decreasing
  std::vector<double> counts;
  double slope = 0.0;
  double intercept = 0.0;
  int fit_lo = 0;  // first index used in the fit
  int fit_hi = 0;  // last index used in the fit
  double residual = 0.0;
  bool approximate = false;  // a cover was capped before reaching the needed refinement
  std::string label = "box dimension (upper bound proxy)";
};

// Fit log N against log(1/r) after dropping `trim` scales at each end.
// The trim shrinks automatically so that at least 3 scales remain.
BoxCountReport fit_box_counts(std::vector<double> scales, std::vector<double> counts, int trim);

// Occupied grid cells of side s (anchored at offset*s) meeting the set in
// positive length at the cover level whose cells are <= s/4. Degenerate
// cells are counted by containment.
uint64_t axis_grid_count(const AxisSet& axis, double s, double offset, bool* approximate = nullptr);

// Exact-cover parabolic box counts over the given scales.
BoxCountReport estimate_dim_rho(const ProductSetSpec& product, std::vector<double> scales,
                                int trim = 2, double offset = 0.0);

BoxCountReport euclid_box_count_dim(const std::vector<Vec>& points, int d,
                                    std::vector<double> scales, int trim = 2, double offset = 0.0);

// r_k = r0 * factor^k for k = 0..n-1.
std::vector<double> geometric_scales(double r0, double factor, int n);

}  // namespace thermocap

#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace thermocap {

inline constexpr int kMaxDim = 3;
inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.14159265358979323846;

// Bad input or configuration. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Quadrature or optimizer failure. The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double residual = 0.0)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

using Vec = std::array<double, kMaxDim>;

struct SpaceTimePoint {
  double t = 0.0;
  Vec x{0.0, 0.0, 0.0};
};

inline double norm(const Vec& v, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += v[i] * v[i];
  return std::sqrt(s);
}

inline double dist(const Vec& a, const Vec& b, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) {
    double u = a[i] - b[i];
    s += u * u;
  }
  return std::sqrt(s);
}

inline void require_dim(int d) {
  if (d < 1 || d > kMaxDim)
    throw ConfigError("spatial dimension must be in [1," + std::to_string(kMaxDim) + "], got " +
                      std::to_string(d));
}

}  // namespace thermocap

#pragma once

#include <functional>
#include <vector>

namespace thermocap::quad {

using Fn = std::function<double(double)>;

struct Result {
  double value = 0.0;
  double abserr = 0.0;
  int status = 0;  // GSL status code; 0 on success
};

struct Tol {
  double abs = 0.0;
  double rel = 1e-10;
  std::size_t limit = 2000;
};

// All routines return the GSL status instead of throwing; `checked` throws
// NumericalError carrying the error estimate on failure.
Result qags(const Fn& f, double a, double b, Tol tol = {});
Result qagp(const Fn& f, std::vector<double> points, Tol tol = {});
Result qagiu(const Fn& f, double a, Tol tol = {});
// Oscillatory Fourier integral over [a, inf) of f(x) cos(omega x) or sin(omega x).
Result qawf(const Fn& f, double a, double omega, bool sine, Tol tol = {});

// Throws NumericalError if r.status != 0 and the error estimate is not small
// relative to the value (roundoff-limited results within `accept_rel`, or
// with error below `accept_abs`, pass).
double checked(const Result& r, const char* what, double accept_rel = 1e-6,
               double accept_abs = 0.0);

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

}  // namespace thermocap::quad

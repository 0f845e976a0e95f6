#include "thermocap/quadrature.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "thermocap/common.hpp"

namespace thermocap::quad {

namespace {

struct HandlerOff {
  HandlerOff() { gsl_set_error_handler_off(); }
};
const HandlerOff handler_off;

double trampoline(double x, void* p) { return (*static_cast<const Fn*>(p))(x); }

struct Workspace {
  explicit Workspace(std::size_t n) : w(gsl_integration_workspace_alloc(n)) {}
  ~Workspace() { gsl_integration_workspace_free(w); }
  gsl_integration_workspace* w;
};

gsl_function wrap(const Fn& f) {
  gsl_function g;
  g.function = &trampoline;
  g.params = const_cast<Fn*>(&f);
  return g;
}

}  // namespace

Result qags(const Fn& f, double a, double b, Tol tol) {
  Result r;
  if (a == b) return r;
  Workspace ws(tol.limit);
  auto g = wrap(f);
  r.status = gsl_integration_qags(&g, a, b, tol.abs, tol.rel, tol.limit, ws.w, &r.value, &r.abserr);
  return r;
}

Result qagp(const Fn& f, std::vector<double> points, Tol tol) {
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  Result r;
  if (points.size() < 2) return r;
  Workspace ws(tol.limit);
  auto g = wrap(f);
  r.status = gsl_integration_qagp(&g, points.data(), points.size(), tol.abs, tol.rel, tol.limit,
                                  ws.w, &r.value, &r.abserr);
  return r;
}

Result qagiu(const Fn& f, double a, Tol tol) {
  Result r;
  Workspace ws(tol.limit);
  auto g = wrap(f);
  r.status = gsl_integration_qagiu(&g, a, tol.abs, tol.rel, tol.limit, ws.w, &r.value, &r.abserr);
  return r;
}

Result qawf(const Fn& f, double a, double omega, bool sine, Tol tol) {
  Result r;
  Workspace ws(tol.limit), cyc(tol.limit);
  gsl_integration_qawo_table* t =
      gsl_integration_qawo_table_alloc(omega, 1.0, sine ? GSL_INTEG_SINE : GSL_INTEG_COSINE, 50);
  auto g = wrap(f);
  double eps = tol.abs > 0 ? tol.abs : 1e-14;
  r.status = gsl_integration_qawf(&g, a, eps, tol.limit, ws.w, cyc.w, t, &r.value, &r.abserr);
  gsl_integration_qawo_table_free(t);
  return r;
}

double checked(const Result& r, const char* what, double accept_rel, double accept_abs) {
  if (r.status != 0 && !(r.abserr <= accept_rel * std::abs(r.value) + accept_abs + 1e-300)) {
    throw NumericalError(std::string(what) + ": " + gsl_strerror(r.status), r.abserr);
  }
  if (!std::isfinite(r.value)) throw NumericalError(std::string(what) + ": non-finite result", r.abserr);
  return r.value;
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  gsl_integration_glfixed_table* t = gsl_integration_glfixed_table_alloc(n);
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) gsl_integration_glfixed_point(-1.0, 1.0, i, &x[i], &w[i], t);
  gsl_integration_glfixed_table_free(t);
}

}  // namespace thermocap::quad

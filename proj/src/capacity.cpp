#include "thermocap/capacity.hpp"

#include <gsl/gsl_multifit.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "thermocap/cell_energy.hpp"
#include "thermocap/kernels.hpp"
#include "thermocap/parabolic_geometry.hpp"
#include "thermocap/stats.hpp"

namespace thermocap {

// ---- discrete energies ---------------------------------------------------------

namespace {

template <class Kernel>
EnergyReport double_sum(const DiscreteMeasure& mu, EnergyKind kind, double param, Kernel&& k) {
  mu.validate();
  EnergyReport rep;
  rep.kind = kind;
  rep.parameter = param;
  rep.atoms = mu.size();
  rep.excluded_pairs = mu.size();
  rep.single_atom = mu.size() == 1;
  double total = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu.weights[i] == 0.0) continue;
    for (std::size_t j = i + 1; j < mu.size(); ++j) {
      if (mu.weights[j] == 0.0) continue;
      double v = k(mu.atoms[i], mu.atoms[j]);
      if (std::isinf(v)) {
        rep.value = kInf;
        return rep;
      }
      total += 2.0 * mu.weights[i] * mu.weights[j] * v;
    }
  }
  rep.value = total;
  return rep;
}

}  // namespace

EnergyReport energy(const DiscreteMeasure& mu, double gamma) {
  if (gamma < 0) throw ConfigError("gamma must be >= 0");
  const int d = mu.d;
  return double_sum(mu, EnergyKind::Gamma, gamma, [&](const SpaceTimePoint& p, const SpaceTimePoint& q) {
    return energy_kernel_gamma(p.t, p.x, q.t, q.x, gamma, d);
  });
}

EnergyReport i_beta_energy(const DiscreteMeasure& mu, double beta) {
  if (!(beta > 0)) throw ConfigError("beta must be > 0");
  const int d = mu.d;
  return double_sum(mu, EnergyKind::IBeta, beta, [&](const SpaceTimePoint& p, const SpaceTimePoint& q) {
    return i_beta_kernel(p.t, p.x, q.t, q.x, beta, d);
  });
}

EnergyReport upsilon_tau_energy(const DiscreteMeasure& mu, double tau) {
  if (tau < 0) throw ConfigError("tau must be >= 0");
  const int d = mu.d;
  return double_sum(mu, EnergyKind::UpsilonTau, tau,
                    [&](const SpaceTimePoint& p, const SpaceTimePoint& q) {
                      return tau == 0.0 ? 1.0 : bessel_riesz_kernel_rho(p, q, tau, d);
                    });
}

// ---- Frank-Wolfe with away steps ---------------------------------------------------

CapacityReport minimize_quadratic(const std::vector<double>& Kin, std::size_t n,
                                  const SolverOptions& opt) {
  if (n == 0) throw ConfigError("need at least one atom");
  if (Kin.size() != n * n) throw ConfigError("kernel matrix has the wrong size");
  CapacityReport rep;
  rep.weights.assign(n, 0.0);

  std::vector<std::size_t> act;
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isinf(Kin[i * n + i])) act.push_back(i);
  rep.excluded_atoms = n - act.size();
  if (act.empty()) {
    rep.min_energy = kInf;
    rep.capacity = 0.0;
    rep.converged = true;
    return rep;
  }
  const std::size_t m = act.size();
  std::vector<double> K(m * m);
  double maxfin = 0.0;
  bool any_inf = false;
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) {
      double v = Kin[act[a] * n + act[b]];
      if (std::isinf(v))
        any_inf = true;
      else
        maxfin = std::max(maxfin, std::abs(v));
      K[a * m + b] = v;
    }
  if (maxfin == 0.0 && !any_inf) {
    rep.degenerate_kernel = true;
    rep.min_energy = 0.0;
    rep.capacity = kInf;
    rep.converged = true;
    for (std::size_t a = 0; a < m; ++a) rep.weights[act[a]] = 1.0 / m;
    return rep;
  }
  if (any_inf) {
    rep.infinite_pairs = true;
    double pen = 1e6 * (maxfin + 1.0);
    for (double& v : K)
      if (std::isinf(v)) v = pen;
  }

  std::vector<double> w(m, 0.0);
  if (opt.warm_start.size() == n) {
    double s = 0.0;
    for (std::size_t a = 0; a < m; ++a) s += (w[a] = std::max(opt.warm_start[act[a]], 0.0));
    if (s > 0)
      for (double& x : w) x /= s;
    else
      std::fill(w.begin(), w.end(), 1.0 / m);
  } else {
    std::fill(w.begin(), w.end(), 1.0 / m);
  }

  std::vector<double> g(m);
  auto recompute = [&](double& f) {
    for (std::size_t a = 0; a < m; ++a) {
      double s = 0.0;
      const double* row = &K[a * m];
      for (std::size_t b = 0; b < m; ++b) s += row[b] * w[b];
      g[a] = s;
    }
    f = std::inner_product(w.begin(), w.end(), g.begin(), 0.0);
  };
  double f = 0.0;
  recompute(f);

  long it = 0;
  double gap = kInf;
  for (; it < opt.max_iter; ++it) {
    std::size_t s = 0, v = m;
    double gmin = kInf, gmax = -kInf;
    for (std::size_t a = 0; a < m; ++a) {
      if (g[a] < gmin) {
        gmin = g[a];
        s = a;
      }
      if (w[a] > 0.0 && g[a] > gmax) {
        gmax = g[a];
        v = a;
      }
    }
    gap = 2.0 * (f - gmin);
    rep.min_gradient = gmin;
    if (gap < opt.tol * (1.0 + std::abs(f))) {
      rep.converged = true;
      break;
    }
    bool fw = (f - gmin) >= (gmax - f) || v == m;
    double dg, dKd, tmax;
    if (fw) {
      dg = gmin - f;
      dKd = K[s * m + s] - 2.0 * gmin + f;
      tmax = 1.0;
    } else {
      dg = f - gmax;
      dKd = f - 2.0 * gmax + K[v * m + v];
      tmax = w[v] / (1.0 - w[v]);
    }
    double t = dKd > 0.0 ? std::min(-dg / dKd, tmax) : tmax;
    if (!(t > 0.0)) {
      rep.converged = true;  // stationary up to rounding
      break;
    }
    if (fw) {
      const double* col = &K[s * m];
      for (std::size_t a = 0; a < m; ++a) {
        g[a] = (1.0 - t) * g[a] + t * col[a];
        w[a] *= (1.0 - t);
      }
      w[s] += t;
    } else {
      const double* col = &K[v * m];
      for (std::size_t a = 0; a < m; ++a) {
        g[a] = (1.0 + t) * g[a] - t * col[a];
        w[a] *= (1.0 + t);
      }
      w[v] -= t;
      if (t >= tmax || w[v] < 1e-300) w[v] = 0.0;
    }
    f += 2.0 * t * dg + t * t * dKd;
    if ((it + 1) % 2000 == 0) {
      double s2 = std::accumulate(w.begin(), w.end(), 0.0);
      for (double& x : w) x /= s2;
      recompute(f);
    }
  }
  recompute(f);
  rep.iterations = it;
  rep.gap = 2.0 * (f - *std::min_element(g.begin(), g.end()));
  for (std::size_t a = 0; a < m; ++a) rep.weights[act[a]] = w[a];

  // energy with the original (possibly infinite) entries
  double e = 0.0;
  for (std::size_t a = 0; a < m && !std::isinf(e); ++a) {
    if (w[a] == 0.0) continue;
    for (std::size_t b = 0; b < m; ++b) {
      if (w[b] == 0.0) continue;
      double k = Kin[act[a] * n + act[b]];
      if (std::isinf(k)) {
        e = kInf;
        break;
      }
      e += w[a] * w[b] * k;
    }
  }
  rep.min_energy = std::max(e, 0.0);
  rep.capacity = std::isinf(e) ? 0.0 : (e > 0.0 ? 1.0 / e : kInf);
  if (e == 0.0) rep.degenerate_kernel = true;
  return rep;
}

std::vector<double> point_energy_matrix(const DiscreteMeasure& atoms, double gamma) {
  const std::size_t n = atoms.size();
  std::vector<double> K(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& p = atoms.atoms[i];
      const auto& q = atoms.atoms[j];
      K[i * n + j] = K[j * n + i] = energy_kernel_gamma(p.t, p.x, q.t, q.x, gamma, atoms.d);
    }
  return K;
}

CapacityReport min_energy(const DiscreteMeasure& atoms, double gamma, const SolverOptions& opt) {
  auto K = point_energy_matrix(atoms, gamma);
  auto rep = minimize_quadratic(K, atoms.size(), opt);
  rep.gamma = gamma;
  return rep;
}

CapacityReport min_energy(const CellMeasure& cells, double gamma, const SolverOptions& opt) {
  EnergyMatrixBuilder b(cells);
  std::vector<double> K;
  b.fill(gamma, K);
  auto rep = minimize_quadratic(K, cells.size(), opt);
  rep.gamma = gamma;
  return rep;
}

// ---- Delta -------------------------------------------------------------------------

std::vector<double> GammaGrid::values() const {
  if (!(step > 0) || max < min) throw ConfigError("invalid gamma grid");
  std::vector<double> v;
  int n = static_cast<int>(std::floor((max - min) / step + 1e-9));
  for (int i = 0; i <= n; ++i) v.push_back(min + i * step);
  return v;
}

int matched_time_level(const ProductSetSpec& product, int space_level, int fixed) {
  if (fixed >= 0) return fixed;
  const AxisSet& E = product.time;
  if (E.degenerate() || E.full_interval()) return 0;
  bool space_degenerate = true;
  double lx = 0.0;
  for (const auto& s : product.space)
    if (!s.degenerate()) {
      space_degenerate = false;
      lx = std::max(lx, s.cell_length(space_level));
    }
  if (space_degenerate) return space_level;
  // time cell length closest to the squared space cell length
  double target = lx * lx;
  double L = E.spec.b - E.spec.a;
  int n = static_cast<int>(std::lround(std::log(target / L) / std::log(E.spec.ratio)));
  return std::clamp(n, 0, E.spec.level_cap);
}

Growth classify_growth(const std::vector<double>& e, double rate_threshold, double* rate,
                       int first_level) {
  if (rate) *rate = 0.0;
  for (double v : e)
    if (std::isinf(v)) {
      if (rate) *rate = kInf;
      return Growth::Infinite;
    }
  const std::size_t n = e.size();
  if (n < 3) throw ConfigError("growth classification needs at least 3 levels");
  std::vector<double> inc;
  for (std::size_t i = 0; i + 1 < n; ++i) inc.push_back(e[i + 1] - e[i]);
  // converged to rounding
  for (std::size_t i = 0; i < inc.size(); ++i)
    if (inc[i] <= 1e-9 * std::abs(e[i + 1])) return Growth::Finite;
  const std::size_t m = inc.size();
  const int p = m >= 4 ? 3 : 2;
  gsl_matrix* X = gsl_matrix_alloc(m, p);
  gsl_vector* y = gsl_vector_alloc(m);
  gsl_vector* c = gsl_vector_alloc(p);
  gsl_matrix* cov = gsl_matrix_alloc(p, p);
  gsl_multifit_linear_workspace* ws = gsl_multifit_linear_alloc(m, p);
  for (std::size_t i = 0; i < m; ++i) {
    double lv = std::max(first_level, 1) + static_cast<double>(i);
    gsl_matrix_set(X, i, 0, 1.0);
    gsl_matrix_set(X, i, 1, lv);
    if (p == 3) gsl_matrix_set(X, i, 2, std::log(lv));
    gsl_vector_set(y, i, std::log(inc[i]));
  }
  double chisq = 0.0;
  gsl_multifit_linear(X, y, c, cov, &chisq, ws);
  double lam = std::exp(gsl_vector_get(c, 1));
  gsl_multifit_linear_free(ws);
  gsl_matrix_free(cov);
  gsl_vector_free(c);
  gsl_vector_free(y);
  gsl_matrix_free(X);
  if (rate) *rate = lam;
  return lam < rate_threshold ? Growth::Finite : Growth::Infinite;
}

DeltaEstimate estimate_delta(const ProductSetSpec& product, const GammaGrid& grid,
                             const LevelRange& levels, const DeltaOptions& opt) {
  product.validate();
  if (grid.step > 0.05 + 1e-12) throw ConfigError("gamma grid step must be <= 0.05");
  if (levels.max - levels.min + 1 < 4) throw ConfigError("level range needs at least 4 levels");
  DeltaEstimate est;
  est.gammas = grid.values();
  const std::size_t G = est.gammas.size();
  est.energies.assign(G, {});
  for (int L = levels.min; L <= levels.max; ++L) {
    int tl = matched_time_level(product, L, opt.time_level);
    auto cells = natural_cells(product, tl, L);
    if (cells.size() > opt.max_atoms)
      throw ConfigError("level " + std::to_string(L) + " needs " + std::to_string(cells.size()) +
                        " atoms, above the dense-matrix cap");
    est.levels.push_back(L);
    est.time_levels.push_back(tl);
    EnergyMatrixBuilder builder(cells, opt.near_factor);
    std::vector<double> K, warm;
    for (std::size_t gi = 0; gi < G; ++gi) {
      builder.fill(est.gammas[gi], K);
      SolverOptions so = opt.solver;
      if (!warm.empty()) so.warm_start = warm;
      auto rep = minimize_quadratic(K, cells.size(), so);
      est.energies[gi].push_back(rep.min_energy);
      if (!std::isinf(rep.min_energy)) warm = rep.weights;
    }
  }
  est.rule = "increment rate";
  int last_finite = -1, first_infinite = -1;
  for (std::size_t gi = 0; gi < G; ++gi) {
    const auto& e = est.energies[gi];
    std::vector<double> rat;
    for (std::size_t i = 0; i + 1 < e.size(); ++i) rat.push_back(e[i + 1] / e[i]);
    est.ratios.push_back(rat);
    std::vector<double> top(rat.begin() + rat.size() / 2, rat.end());
    double med = quantile(top, 0.5);
    est.median_ratios.push_back(med);
    est.ratio_rule_growth.push_back(!(med < opt.ratio_threshold) ? Growth::Infinite : Growth::Finite);
    double lam = 0.0;
    Growth g = classify_growth(e, opt.rate_threshold, &lam, levels.min);
    est.rates.push_back(lam);
    est.growth.push_back(g);
    if (g == Growth::Infinite && first_infinite < 0) first_infinite = static_cast<int>(gi);
    if (g == Growth::Finite) {
      if (first_infinite >= 0) est.non_monotone = true;
      if (first_infinite < 0) last_finite = static_cast<int>(gi);
    }
  }
  if (last_finite < 0) {
    est.boundary_low = true;
    est.delta = est.gammas.front();
  } else if (first_infinite < 0) {
    est.boundary_high = true;
    est.delta = est.gammas.back();
  } else {
    est.delta = 0.5 * (est.gammas[last_finite] + est.gammas[first_infinite]);
  }
  return est;
}

ThermalReport thermal_capacity_positive(const ProductSetSpec& product, const LevelRange& levels,
                                        const DeltaOptions& opt) {
  product.validate();
  ThermalReport rep;
  bool all_interval = true;
  for (const auto& s : product.space) all_interval = all_interval && s.full_interval();
  rep.space_has_positive_measure = all_interval;
  for (int L = levels.min; L <= levels.max; ++L) {
    int tl = matched_time_level(product, L, opt.time_level);
    auto cells = natural_cells(product, tl, L);
    if (cells.size() > opt.max_atoms) throw ConfigError("level exceeds the dense-matrix cap");
    auto r = min_energy(cells, 0.0, opt.solver);
    rep.levels.push_back(L);
    rep.energies.push_back(r.min_energy);
  }
  rep.positive =
      classify_growth(rep.energies, opt.rate_threshold, &rep.rate, levels.min) == Growth::Finite;
  return rep;
}

CapacitySign capacity_positive(const ProductSetSpec& product, double gamma, const LevelRange& levels,
                               const DeltaOptions& opt) {
  product.validate();
  CapacitySign out;
  out.gamma = gamma;
  std::vector<double> warm;
  for (int L = levels.min; L <= levels.max; ++L) {
    int tl = matched_time_level(product, L, opt.time_level);
    auto cells = natural_cells(product, tl, L);
    if (cells.size() > opt.max_atoms) throw ConfigError("level exceeds the dense-matrix cap");
    EnergyMatrixBuilder b(cells, opt.near_factor);
    std::vector<double> K;
    b.fill(gamma, K);
    auto r = minimize_quadratic(K, cells.size(), opt.solver);
    out.levels.push_back(L);
    out.energies.push_back(r.min_energy);
  }
  out.positive = classify_growth(out.energies, opt.rate_threshold, &out.rate, levels.min) == Growth::Finite;
  return out;
}

}  // namespace thermocap

#include "thermocap/cell_energy.hpp"

#include <gsl/gsl_interp.h>

#include <algorithm>
#include <cmath>

#include "thermocap/kernels.hpp"
#include "thermocap/quadrature.hpp"

namespace thermocap {

// ---- offset laws -----------------------------------------------------------

double OffsetDensity::pdf(double u) const {
  if (atom || u < lo || u > hi) return 0.0;
  if (u < k1) return height * (u - lo) / (k1 - lo);
  if (u > k2) return height * (hi - u) / (hi - k2);
  return height;
}

bool OffsetDensity::positive_at_zero() const {
  if (atom) return false;
  if (lo < 0.0 && hi > 0.0) return true;
  if (lo == 0.0) return k1 == lo;
  if (hi == 0.0) return k2 == hi;
  return false;
}

OffsetDensity offset_density(const Interval& a, const Interval& b) {
  OffsetDensity o;
  double la = a.length(), lb = b.length();
  if (la <= 0.0 && lb <= 0.0) {
    o.atom = true;
    o.lo = o.k1 = o.k2 = o.hi = a.lo - b.lo;
    return o;
  }
  o.lo = a.lo - b.hi;
  o.hi = a.hi - b.lo;
  double m = std::min(la, lb);
  o.k1 = o.lo + m;
  o.k2 = o.hi - m;
  o.height = 1.0 / std::max(la, lb);
  return o;
}

SpaceTimeKernel SpaceTimeKernel::energy_gamma(int d, double gamma) {
  SpaceTimeKernel k;
  k.d = d;
  k.phi_exponent = gamma;
  if (gamma == 0.0)
    k.phi = [](double) { return 1.0; };
  else
    k.phi = [gamma](double r) { return std::pow(r, -gamma); };
  return k;
}

namespace {

double heat_factor(double u, double r, int d) {
  if (u <= 0.0) return r > 0.0 ? 0.0 : kInf;
  return std::pow(u, -0.5 * d) * std::exp(-0.5 * r * r / u);
}

// Integral over v in [m1, m2] (m1 >= 0) of q(v) v^{-d/2} exp(-r^2/2v), in log v.
double log_profile_part(const std::function<double(double)>& q, double m1, double m2,
                        std::vector<double> kinks, double r, int d) {
  if (m2 <= m1) return 0.0;
  double vlo = m1;
  if (vlo <= 0.0) vlo = r > 0.0 ? std::min(m2 * 1e-3, r * r / 100.0) : m2 * std::exp(-80.0);
  if (vlo >= m2) return 0.0;
  quad::Fn f = [&](double w) {
    double v = std::exp(w);
    return q(v) * v * heat_factor(v, r, d);
  };
  std::vector<double> pts{std::log(vlo), std::log(m2)};
  kinks.push_back(r * r / d);
  for (double k : kinks)
    if (k > vlo && k < m2) pts.push_back(std::log(k));
  auto res = quad::qagp(f, pts, {0.0, 1e-10, 2000});
  return quad::checked(res, "time profile", 1e-7);
}

}  // namespace

double time_profile(const OffsetDensity& u, double r, int d, double shift, double prefactor) {
  if (u.atom) return prefactor * heat_factor(std::abs(u.lo) + shift, r, d);
  if (shift > 0.0) {
    quad::Fn f = [&](double x) { return u.pdf(x) * heat_factor(std::abs(x) + shift, r, d); };
    std::vector<double> pts{u.lo, u.k1, u.k2, u.hi};
    if (u.lo < 0.0 && u.hi > 0.0) pts.push_back(0.0);
    return prefactor * quad::checked(quad::qagp(f, pts, {0.0, 1e-10, 2000}), "time profile", 1e-7);
  }
  if (r == 0.0) {
    // finite only when the density of |U| near 0 tames v^{-d/2}
    if (u.contains_zero()) {
      int m = u.positive_at_zero() ? 0 : 1;
      if (d >= 2 * m + 2) return kInf;
    }
  }
  double total = 0.0;
  std::vector<double> kinks{std::abs(u.k1), std::abs(u.k2), std::abs(u.lo), std::abs(u.hi)};
  if (u.hi > 0.0) {
    std::function<double(double)> q = [&](double v) { return u.pdf(v); };
    total += log_profile_part(q, std::max(u.lo, 0.0), u.hi, kinks, r, d);
  }
  if (u.lo < 0.0) {
    std::function<double(double)> q = [&](double v) { return u.pdf(-v); };
    total += log_profile_part(q, std::max(-u.hi, 0.0), -u.lo, kinks, r, d);
  }
  return prefactor * total;
}

bool cell_pair_diverges(const OffsetDensity& ut, const std::vector<OffsetDensity>& ux,
                        const SpaceTimeKernel& k) {
  int q = 0, q2 = 0;
  for (const auto& o : ux) {
    if (o.atom) {
      if (o.lo != 0.0) return false;
    } else {
      if (!o.contains_zero()) return false;
      if (o.positive_at_zero())
        ++q;
      else
        ++q2;
    }
  }
  double a = 0.0;
  bool log_factor = false;
  if (k.shift <= 0.0) {
    if (ut.atom) {
      if (ut.lo == 0.0) return q + q2 == 0;  // same instant: kernel vanishes off r = 0
    } else if (ut.contains_zero()) {
      int m = ut.positive_at_zero() ? 0 : 1;
      double e = k.d - 2.0 * (m + 1);
      if (e > 0)
        a = e;
      else if (e == 0)
        log_factor = true;
    }
  }
  double c = k.phi_exponent;
  if (q + q2 == 0) return c > 0.0 || a > 0.0 || log_factor;
  return c + a >= q + 2.0 * q2;
}

namespace {

double integrate_space(const std::vector<OffsetDensity>& ux, std::size_t axis, double sumsq,
                       const std::function<double(double)>& F, double rel) {
  if (axis == ux.size()) return F(std::sqrt(sumsq));
  const auto& o = ux[axis];
  if (o.atom) return integrate_space(ux, axis + 1, sumsq + o.lo * o.lo, F, rel);
  quad::Fn f = [&](double v) { return o.pdf(v) * integrate_space(ux, axis + 1, sumsq + v * v, F, rel); };
  std::vector<double> pts{o.lo, o.k1, o.k2, o.hi};
  if (o.lo < 0.0 && o.hi > 0.0) pts.push_back(0.0);
  bool inner = axis + 1 == ux.size();
  auto res = quad::qagp(f, pts, {0.0, inner ? 0.01 * rel : rel, 2000});
  return quad::checked(res, "cell pair average", 100 * rel);
}

// d = 2 with two non-atomic offsets: E f(R) = int f(r) r h(r) dr with
// h(r) = int p1(r cos t) p2(r sin t) dt, so the singularity sits at r = 0 only.
double integrate_polar(const OffsetDensity& o1, const OffsetDensity& o2,
                       const std::function<double(double)>& F, double rel) {
  double m1 = std::max(std::abs(o1.lo), std::abs(o1.hi));
  double m2 = std::max(std::abs(o2.lo), std::abs(o2.hi));
  double rmax = std::hypot(m1, m2);
  auto h = [&](double r) {
    std::vector<double> pts{0.0, kPi, 2.0 * kPi};
    for (double c : {o1.lo, o1.k1, o1.k2, o1.hi})
      if (std::abs(c) < r) {
        double a = std::acos(c / r);
        pts.push_back(a);
        pts.push_back(2.0 * kPi - a);
      }
    for (double c : {o2.lo, o2.k1, o2.k2, o2.hi})
      if (std::abs(c) < r) {
        double a = std::asin(c / r);
        pts.push_back(a < 0 ? a + 2.0 * kPi : a);
        pts.push_back(kPi - a);
      }
    quad::Fn g = [&](double t) { return o1.pdf(r * std::cos(t)) * o2.pdf(r * std::sin(t)); };
    return quad::checked(quad::qagp(g, pts, {0.0, 1e-10, 2000}), "cell pair average (angle)", 1e-7);
  };
  std::vector<double> pts{0.0, rmax};
  for (double a : {o1.lo, o1.k1, o1.k2, o1.hi})
    for (double b : {0.0, o2.lo, o2.k1, o2.k2, o2.hi}) {
      double r = std::hypot(a, b);
      if (r > 0.0 && r < rmax) pts.push_back(r);
      r = std::abs(b);
      if (r > 0.0 && r < rmax) pts.push_back(r);
    }
  quad::Fn f = [&](double r) {
    if (r <= 0.0) return 0.0;
    double hr = h(r);
    return hr == 0.0 ? 0.0 : r * hr * F(r);
  };
  return quad::checked(quad::qagp(f, pts, {0.0, rel, 2000}), "cell pair average", 100 * rel);
}

}  // namespace

double cell_pair_average(const Cell& a, const Cell& b, const SpaceTimeKernel& k,
                         const std::function<double(double)>* profile) {
  OffsetDensity ut = offset_density(a.t, b.t);
  std::vector<OffsetDensity> ux;
  for (int i = 0; i < k.d; ++i) ux.push_back(offset_density(a.x[i], b.x[i]));
  if (cell_pair_diverges(ut, ux, k)) return kInf;
  std::function<double(double)> F = [&](double r) {
    double A = profile ? (*profile)(r) : time_profile(ut, r, k.d, k.shift, k.prefactor);
    if (A == 0.0) return 0.0;
    return A * k.phi(r);
  };
  // a tabulated profile is only accurate to about 1e-7
  double rel = profile ? std::max(1e-6, k.rel_tol) : k.rel_tol;
  if (k.d == 2 && !ux[0].atom && !ux[1].atom) return integrate_polar(ux[0], ux[1], F, rel);
  return integrate_space(ux, 0, 0.0, F, rel);
}

double cell_measure_energy(const CellMeasure& m, const SpaceTimeKernel& k) {
  double total = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = i; j < m.size(); ++j) {
      double w = m.weights[i] * m.weights[j];
      if (w == 0.0) continue;
      double v = cell_pair_average(m.cells[i], m.cells[j], k);
      if (std::isinf(v)) return kInf;
      total += (i == j ? 1.0 : 2.0) * w * v;
    }
  }
  return total;
}

// ---- mollified energy -----------------------------------------------------------

MollifiedEnergy mollified_energy(const CellMeasure& m, const std::function<double(double)>& kap,
                                 double kap_exponent, const std::vector<double>& eps) {
  if (m.d != 1) throw ConfigError("mollified energy is implemented for d = 1");
  double rmax = 0.0;
  for (const auto& a : m.cells)
    for (const auto& b : m.cells) rmax = std::max(rmax, std::max(a.x[0].hi - b.x[0].lo, b.x[0].hi - a.x[0].lo));
  const double pref = 1.0 / std::sqrt(2 * kPi);
  MollifiedEnergy out;
  out.eps = eps;
  // kap and its smoothed versions are tables
  SpaceTimeKernel raw{1, 0.0, pref, kap, kap_exponent, 1e-6};
  out.raw = cell_measure_energy(m, raw);
  for (double e : eps) {
    // smooth even function of r: cubic spline in r on a uniform grid
    const int n = 1201;
    const double hi = rmax + 0.01;
    std::vector<double> r(n), v(n);
    for (int i = 0; i < n; ++i) {
      r[i] = hi * i / (n - 1);
      v[i] = gaussian_smooth_1d(kap, e, r[i]);
    }
    std::unique_ptr<gsl_interp, void (*)(gsl_interp*)> hold(gsl_interp_alloc(gsl_interp_steffen, n), gsl_interp_free);
    gsl_interp* it = hold.get();
    gsl_interp_init(it, r.data(), v.data(), n);
    SpaceTimeKernel sm{1, e * e, pref, [&](double x) {
                         return gsl_interp_eval(it, r.data(), v.data(), std::min(std::abs(x), hi), nullptr);
                       },
                       0.0, 1e-6};
    out.smoothed.push_back(cell_measure_energy(m, sm));
  }
  return out;
}

// ---- matrix builder -------------------------------------------------------------

struct EnergyMatrixBuilder::TimeClass {
  OffsetDensity u;
  int d = 1;
  bool midpoint = false;
  double mid = 0.0;
  std::vector<double> lr, la;
  gsl_interp* interp = nullptr;

  ~TimeClass() {
    if (interp) gsl_interp_free(interp);
  }

  double operator()(double r) const {
    if (u.atom) return heat_factor(std::abs(u.lo), r, d);
    if (midpoint) return heat_factor(std::abs(mid), r, d);
    if (interp && r > 0.0) {
      double x = std::log(r);
      if (x >= lr.front() && x <= lr.back())
        return std::exp(gsl_interp_eval(interp, lr.data(), la.data(), x, nullptr));
    }
    return time_profile(u, r, d, 0.0);
  }

  void tabulate(double rmin, double rmax) {
    if (u.atom || midpoint || !(rmin > 0.0) || rmax <= rmin) return;
    double l0 = std::log(rmin * 0.5), l1 = std::log(rmax * 2.0);
    int n = std::max(8, static_cast<int>((l1 - l0) / std::log(10.0) * 40.0));
    for (int i = 0; i < n; ++i) {
      double x = l0 + (l1 - l0) * i / (n - 1);
      double v = time_profile(u, std::exp(x), d, 0.0);
      lr.push_back(x);
      la.push_back(std::log(std::max(v, 1e-300)));
    }
    interp = gsl_interp_alloc(gsl_interp_steffen, lr.size());
    gsl_interp_init(interp, lr.data(), la.data(), lr.size());
  }
};

namespace {

long long key_of(double v, double scale) {
  return scale > 0 ? std::llround(v / scale * 1e6) : std::llround(v * 1e12);
}

}  // namespace

EnergyMatrixBuilder::EnergyMatrixBuilder(const CellMeasure& m, double near_factor)
    : d_(m.d), n_(m.size()), cells_(m.cells) {
  // distinct time cells
  std::vector<Interval> tcells;
  cell_time_index_.resize(n_);
  {
    std::map<std::pair<double, double>, int> idx;
    for (std::size_t i = 0; i < n_; ++i) {
      auto key = std::make_pair(cells_[i].t.lo, cells_[i].t.hi);
      auto it = idx.find(key);
      if (it == idx.end()) {
        it = idx.emplace(key, static_cast<int>(tcells.size())).first;
        tcells.push_back(cells_[i].t);
      }
      cell_time_index_[i] = it->second;
    }
  }
  n_time_cells_ = tcells.size();
  tpair_class_.assign(n_time_cells_ * n_time_cells_, -1);
  {
    std::map<std::tuple<long long, long long, long long, long long, bool>, int> cls;
    for (std::size_t a = 0; a < n_time_cells_; ++a)
      for (std::size_t b = 0; b < n_time_cells_; ++b) {
        auto u = offset_density(tcells[a], tcells[b]);
        double sc = std::max(tcells[a].length(), tcells[b].length());
        auto key = std::make_tuple(key_of(u.lo, sc), key_of(u.k1, sc), key_of(u.k2, sc),
                                   key_of(u.hi, sc), u.atom);
        auto it = cls.find(key);
        if (it == cls.end()) {
          auto tc = std::make_unique<TimeClass>();
          tc->u = u;
          tc->d = d_;
          tc->mid = tcells[a].mid() - tcells[b].mid();
          tc->midpoint = !u.atom && std::abs(tc->mid) >= 3.0 * sc;
          it = cls.emplace(key, static_cast<int>(time_classes_.size())).first;
          time_classes_.push_back(std::move(tc));
        }
        tpair_class_[a * n_time_cells_ + b] = it->second;
      }
  }

  // classify pairs
  far_a_.assign(n_ * n_, 0.0f);
  far_logr_.assign(n_ * n_, 0.0f);
  near_id_.assign(n_ * n_, -1);
  std::vector<double> rmin(time_classes_.size(), kInf), rmax(time_classes_.size(), 0.0);
  std::map<std::vector<long long>, int> near_map;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i; j < n_; ++j) {
      int tc = tpair_class_[cell_time_index_[i] * n_time_cells_ + cell_time_index_[j]];
      bool near = true;
      double r2 = 0.0;
      for (int k = 0; k < d_; ++k) {
        double dc = cells_[i].x[k].mid() - cells_[j].x[k].mid();
        double L = std::max(cells_[i].x[k].length(), cells_[j].x[k].length());
        r2 += dc * dc;
        if (L == 0.0 ? dc != 0.0 : std::abs(dc) > near_factor * L) near = false;
      }
      if (near) {
        std::vector<long long> key{tc};
        for (int k = 0; k < d_; ++k) {
          auto o = offset_density(cells_[i].x[k], cells_[j].x[k]);
          double sc = std::max(cells_[i].x[k].length(), cells_[j].x[k].length());
          key.insert(key.end(), {key_of(o.lo, sc), key_of(o.k1, sc), key_of(o.k2, sc),
                                 key_of(o.hi, sc), o.atom ? 1 : 0});
        }
        double rr = 0.0, sc = 0.0;
        for (int k = 0; k < d_; ++k) {
          auto o = offset_density(cells_[i].x[k], cells_[j].x[k]);
          rr += std::max(o.lo * o.lo, o.hi * o.hi);
          sc = std::max(sc, std::max(cells_[i].x[k].length(), cells_[j].x[k].length()));
        }
        rmax[tc] = std::max(rmax[tc], std::sqrt(rr));
        if (sc > 0.0) rmin[tc] = std::min(rmin[tc], 1e-9 * sc);
        auto it = near_map.find(key);
        if (it == near_map.end()) {
          it = near_map.emplace(key, static_cast<int>(near_keys_.size())).first;
          near_keys_.emplace_back(tc, i, j);
        }
        near_id_[i * n_ + j] = near_id_[j * n_ + i] = it->second;
      } else {
        double r = std::sqrt(r2);
        rmin[tc] = std::min(rmin[tc], r);
        rmax[tc] = std::max(rmax[tc], r);
        far_logr_[i * n_ + j] = far_logr_[j * n_ + i] = static_cast<float>(std::log(r));
      }
    }
  }
  for (std::size_t c = 0; c < time_classes_.size(); ++c) time_classes_[c]->tabulate(rmin[c], rmax[c]);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i; j < n_; ++j) {
      if (near_id_[i * n_ + j] >= 0) continue;
      int tc = tpair_class_[cell_time_index_[i] * n_time_cells_ + cell_time_index_[j]];
      double r = std::exp(static_cast<double>(far_logr_[i * n_ + j]));
      far_a_[i * n_ + j] = far_a_[j * n_ + i] = static_cast<float>((*time_classes_[tc])(r));
    }
}

EnergyMatrixBuilder::~EnergyMatrixBuilder() = default;

void EnergyMatrixBuilder::fill(double gamma, std::vector<double>& K) const {
  std::vector<double> near_val(near_keys_.size());
  auto kern = SpaceTimeKernel::energy_gamma(d_, gamma);
  for (std::size_t c = 0; c < near_keys_.size(); ++c) {
    auto key = std::make_pair(static_cast<int>(c), gamma);
    auto it = near_cache_.find(key);
    if (it == near_cache_.end()) {
      auto [tc, i, j] = near_keys_[c];
      const TimeClass& cls = *time_classes_[tc];
      std::function<double(double)> prof = [&cls](double r) { return cls(r); };
      double v = cell_pair_average(cells_[i], cells_[j], kern, &prof);
      it = near_cache_.emplace(key, v).first;
    }
    near_val[c] = it->second;
  }
  K.resize(n_ * n_);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      std::size_t p = i * n_ + j;
      int id = near_id_[p];
      K[p] = id >= 0 ? near_val[id]
                     : static_cast<double>(far_a_[p]) * std::exp(-gamma * static_cast<double>(far_logr_[p]));
    }
  }
}

}  // namespace thermocap

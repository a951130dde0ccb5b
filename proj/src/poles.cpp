#include "kubo/poles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace kubo {

PoleSet pole_set(int k, const ConductivityParams& p) {
  if (k < 0) throw ConfigError("pole count k must be >= 0");
  if (k > 0 && p.beta == 0.0) throw ConfigError("pole expansion needs beta > 0");
  PoleSet ps;
  ps.k = k;
  for (int l = -2 * k + 1; l <= 2 * k - 1; l += 2)
    ps.poles.emplace_back(p.e_fermi, l * std::numbers::pi / p.beta);
  return ps;
}

cplx remainder_eval(double e1, double e2, const ConductivityParams& p, int k) {
  cplx r = f_temp(e1, e2, p);
  if (k == 0) return r;
  for (cplx z : pole_set(k, p).poles) r -= (1.0 / p.beta) / ((e1 - z) * (e2 - z));
  return r;
}

int optimal_k(const ConductivityParams& p) {
  p.validate();
  const double b = p.beta, eta = p.eta;
  if (b <= std::pow(eta, -0.5)) return b * std::sqrt(eta) <= 0.5 ? 0 : 1;
  if (b <= std::pow(eta, -1.5)) return static_cast<int>(std::ceil(std::sqrt(b) * std::pow(eta, 0.25)));
  return static_cast<int>(std::ceil(std::pow(b, 2.0 / 3.0) * std::sqrt(eta)));
}

namespace {

// log|q(x)| = -sum log|x - z|
double log_abs_q(const std::vector<cplx>& poles, double x) {
  double s = 0.0;
  for (cplx z : poles) s -= std::log(std::abs(x - z));
  return s;
}

std::pair<double, double> log_q_range(const std::vector<cplx>& poles) {
  double lo = INFINITY, hi = -INFINITY;
  for (int i = 0; i <= 1000; ++i) {
    const double v = log_abs_q(poles, -1.0 + 2.0 * i / 1000.0);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

constexpr double kMaxStabilityRatio = 1e12;

// The w with |w| >= 1 in z = (w + 1/w) / 2, and s = w - z = sqrt(z^2 - 1).
std::pair<cplx, cplx> joukowsky_inverse(cplx z) {
  cplx s = std::sqrt(z - 1.0) * std::sqrt(z + 1.0);
  cplx w = z + s;
  if (std::abs(w) < 1.0) {
    s = -s;
    w = z + s;
  }
  return {w, s};
}

double norm2(const Vector& v) {
  double s = 0.0;
  for (const cplx& x : v) s += std::norm(x);
  return std::sqrt(s);
}

// x = sum_k a_k T_k(H) v
Vector chebyshev_apply(const SparseOperator& h, const std::vector<cplx>& a, const Vector& v,
                       OpCounters* counters) {
  const auto& kern = simd::kernels();
  Vector x(v.size(), 0.0);
  ChebyshevSequence seq(h, v, counters);
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (k > 0) seq.advance();
    kern.axpy(a[k], seq.current().data(), x.data(), x.size());
  }
  return x;
}

void check_residual(const SparseOperator& h, const std::vector<cplx>& poles, const Vector& x,
                    const Vector& v, double tol, OpCounters* counters) {
  // prod (H - z) x should reproduce v
  Vector y = x, t(x.size());
  for (cplx z : poles) {
    simd::kernels().spmv(h.view(), y.data(), t.data());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = t[i] - z * y[i];
    if (counters) ++counters->matvecs;
  }
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= v[i];
  const double nv = norm2(v);
  if (nv > 0.0 && norm2(y) > 10.0 * tol * nv)
    throw NumericalError("resolvent residual above tolerance");
}

}  // namespace

double stability_ratio(const std::vector<cplx>& poles) {
  const auto [lo, hi] = log_q_range(poles);
  return std::exp(hi - lo);
}

std::vector<PoleGroup> group_poles(const PoleSet& ps, int max_group) {
  if (max_group < 1) throw ConfigError("group size must be >= 1");
  std::vector<PoleGroup> out;
  auto finish = [&out](std::vector<cplx> poles) {
    PoleGroup g;
    g.stability_ratio = stability_ratio(poles);
    g.poles = std::move(poles);
    out.push_back(std::move(g));
  };
  const int k = ps.k;
  if (max_group < 2) {
    for (cplx z : ps.poles) finish({z});
    return out;
  }
  // conjugate pairs from the real axis outwards; poles[k-1-j], poles[k+j]
  std::vector<cplx> cur;
  for (int j = 0; j < k; ++j) {
    const std::vector<cplx> pair{ps.poles[k - 1 - j], ps.poles[k + j]};
    std::vector<cplx> merged = cur;
    merged.insert(merged.end(), pair.begin(), pair.end());
    if (!cur.empty() && static_cast<int>(merged.size()) <= max_group &&
        stability_ratio(merged) <= kMaxStabilityRatio) {
      cur = std::move(merged);
      continue;
    }
    if (!cur.empty()) finish(std::move(cur));
    cur = pair;
    if (stability_ratio(cur) > kMaxStabilityRatio) {
      finish({pair[0]});
      finish({pair[1]});
      cur.clear();
    }
  }
  if (!cur.empty()) finish(std::move(cur));
  return out;
}

int resolvent_degree_cap(cplx z) {
  return 40 * static_cast<int>(std::ceil(1.0 / std::abs(z.imag())));
}

int resolvent_degree(cplx z, double tol) {
  if (z.imag() == 0.0) throw ConfigError("resolvent needs Im z != 0");
  if (!(tol > 0.0)) throw ConfigError("resolvent tolerance must be > 0");
  const auto [w, s] = joukowsky_inverse(z);
  const double rho = std::abs(w);
  // tail after degree d: (2/|s|) rho^{-(d+1)} / (1 - 1/rho); scaled by
  // ||H - z|| <= 1 + |z| this bounds the residual
  const double need = 2.0 * (1.0 + std::abs(z)) / (std::abs(s) * (1.0 - 1.0 / rho) * tol);
  const int d = static_cast<int>(std::ceil(std::log(need) / std::log(rho))) - 1;
  return std::max(d, 0);
}

Vector resolvent_apply(const SparseOperator& h, cplx z, const Vector& v, double tol,
                       OpCounters* counters) {
  if (static_cast<int>(v.size()) != h.n) throw ConfigError("resolvent_apply: dimension mismatch");
  const int d = resolvent_degree(z, tol);
  if (d > resolvent_degree_cap(z))
    throw NumericalError("resolvent degree cap exceeded for z = (" + std::to_string(z.real()) +
                         ", " + std::to_string(z.imag()) + ")");
  const auto [w, s] = joukowsky_inverse(z);
  // 1/(x - z) = -(2/s) sum' w^{-k} T_k(x)
  std::vector<cplx> a(d + 1);
  cplx t = 1.0;
  for (int k = 0; k <= d; ++k) {
    a[k] = (k == 0 ? -1.0 : -2.0) * t / s;
    t /= w;
  }
  Vector x = chebyshev_apply(h, a, v, counters);
  check_residual(h, {z}, x, v, tol, counters);
  if (counters) ++counters->resolvent_solves;
  return x;
}

Vector apply_pole_weight(const SparseOperator& h, const std::vector<cplx>& poles, const Vector& v,
                         double tol, OpCounters* counters) {
  if (poles.empty()) return v;
  if (poles.size() == 1) return resolvent_apply(h, poles[0], v, tol, counters);
  double min_im = INFINITY, scale = 1.0;
  for (cplx z : poles) {
    if (z.imag() == 0.0) throw ConfigError("pole weight needs Im z != 0");
    min_im = std::min(min_im, std::abs(z.imag()));
    scale *= 1.0 + std::abs(z);
  }
  const double tolq = tol / scale;
  const int cap = 40 * static_cast<int>(std::ceil(1.0 / min_im)) * static_cast<int>(poles.size());
  std::vector<cplx> a;
  for (int n = 16;; n *= 2) {
    if (n > 4 * cap) throw NumericalError("pole-group weight: degree cap exceeded");
    const std::vector<double> x = lobatto_nodes(n);
    std::vector<cplx> s(n + 1);
    for (int j = 0; j <= n; ++j) {
      cplx q = 1.0;
      for (cplx z : poles) q /= x[j] - z;
      s[j] = q;
    }
    a = transform1d(n, s);
    double tail = 0.0;
    for (int k = 3 * n / 4; k <= n; ++k) tail += std::abs(a[k]);
    if (tail <= 0.1 * tolq) break;
  }
  // trim trailing coefficients within the budget
  double dropped = 0.0;
  while (a.size() > 1 && dropped + std::abs(a.back()) <= 0.5 * tolq) {
    dropped += std::abs(a.back());
    a.pop_back();
  }
  Vector x = chebyshev_apply(h, a, v, counters);
  check_residual(h, poles, x, v, tol, counters);
  if (counters) ++counters->resolvent_solves;
  return x;
}

PolePlan make_pole_plan(const ConductivityParams& p, int k, int group_size, double eps,
                        double resolvent_tol, int kmax) {
  p.validate();
  if (!(eps >= 0.0)) throw ConfigError("series eps must be >= 0");
  if (kmax < 1) throw ConfigError("kmax must be >= 1");
  PolePlan plan;
  plan.params = p;
  plan.pole_set = pole_set(k, p);
  plan.group_size = group_size;
  plan.series_eps = eps;
  plan.resolvent_tol = resolvent_tol;
  plan.remainder_rates = decay_rates(p, 2 * k + 1);
  plan.groups = group_poles(plan.pole_set, group_size);

  const cplx s(p.omega, p.eta);
  plan.remainder_coeffs =
      coeffs_of([&](double a, double b) { return remainder_eval(a, b, p, k) / (a - b + s); }, kmax);
  const double eps_rem = plan.groups.empty() ? eps : 0.5 * eps;
  plan.remainder_kept = truncation_set_greedy(plan.remainder_coeffs, eps_rem);
  if (plan.groups.empty()) return plan;

  const double eps_group = 0.5 * eps / plan.groups.size();
  CoeffMatrix relax;
  bool have_relax = false;
  for (PoleGroup& g : plan.groups) {
    if (g.poles.size() == 1) {
      if (!have_relax) {
        relax = coeffs_of([&](double a, double b) { return 1.0 / (a - b + s); }, kmax);
        have_relax = true;
      }
      g.coeffs = relax;
      for (cplx& c : g.coeffs.coeffs) c /= p.beta;
    } else {
      const auto& zs = g.poles;
      g.coeffs = coeffs_of(
          [&](double a, double b) {
            cplx P = 0.0;
            for (std::size_t i = 0; i < zs.size(); ++i) {
              cplx t = 1.0;
              for (std::size_t j = 0; j < zs.size(); ++j)
                if (j != i) t *= (a - zs[j]) * (b - zs[j]);
              P += t;
            }
            return P / (p.beta * (a - b + s));
          },
          kmax);
    }
    g.weight_sup = std::exp(2.0 * log_q_range(g.poles).second);
    g.kept = truncation_set_greedy(g.coeffs, eps_group / g.weight_sup);
  }

  double degree_total = 0.0;
  for (cplx z : plan.pole_set.poles) degree_total += resolvent_degree(z, resolvent_tol);
  if (degree_total > std::pow(p.eta, -1.5))
    plan.warnings.push_back("resolvent degrees (" + std::to_string(int(degree_total)) +
                            " matvecs per side) exceed the eta^{-3/2} inner-product budget; "
                            "the pole expansion may not pay off");
  return plan;
}

EntryResult local_conductivity_via_poles(const SparseOperator& h, const SparseOperator& mp,
                                         const SparseOperator& mpp, const PolePlan& plan,
                                         int seed) {
  EntryResult r;
  if (!plan.remainder_kept.empty()) {
    const EntryResult e = local_conductivity(h, mp, mpp, plan.remainder_coeffs, plan.remainder_kept, seed);
    r.value += e.value;
    r.counters += e.counters;
  }
  for (const PoleGroup& g : plan.groups) {
    if (g.kept.empty()) continue;
    if (g.stability_ratio > kMaxStabilityRatio) throw NumericalError("pole group is unstable");
    const EntryResult e =
        weighted_local_conductivity(h, mp, mpp, g.coeffs, g.kept, seed, g.poles, plan.resolvent_tol);
    r.value += e.value;
    r.counters += e.counters;
  }
  return r;
}

LocalConductivityResult local_conductivity_via_poles_tensor(const LocalSystem& sys,
                                                            const PolePlan& plan) {
  LocalConductivityResult res;
  for (int p = 1; p <= 2; ++p)
    for (int pp = 1; pp <= 2; ++pp) {
      const EntryResult e =
          local_conductivity_via_poles(sys.h, sys.m[p - 1], sys.m[pp - 1], plan, sys.seed());
      res(p, pp) = e.value;
      res.entry_counters[2 * (p - 1) + (pp - 1)] = e.counters;
      res.counters += e.counters;
    }
  return res;
}

}  // namespace kubo

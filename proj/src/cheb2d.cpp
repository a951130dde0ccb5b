#include "kubo/cheb2d.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <tuple>

namespace kubo {

double CoeffMatrix::abs_sum() const {
  double s = 0.0;
  for (const cplx& c : coeffs) s += std::abs(c);
  return s;
}

IndexSet IndexSet::from_pairs(std::vector<std::pair<int, int>> pairs) {
  IndexSet k;
  std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
    return std::tie(a.second, a.first) < std::tie(b.second, b.first);
  });
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  k.pairs = std::move(pairs);
  for (const auto& [k1, k2] : k.pairs) {
    k.k1s.push_back(k1);
    k.k2s.push_back(k2);
  }
  for (auto* v : {&k.k1s, &k.k2s}) {
    std::sort(v->begin(), v->end());
    v->erase(std::unique(v->begin(), v->end()), v->end());
  }
  return k;
}

int IndexSet::max_sum() const {
  int m = -1;
  for (const auto& [k1, k2] : pairs) m = std::max(m, k1 + k2);
  return m;
}

bool IndexSet::contains(int k1, int k2) const {
  return std::binary_search(pairs.begin(), pairs.end(), std::pair{k1, k2},
                            [](const auto& a, const auto& b) {
                              return std::tie(a.second, a.first) < std::tie(b.second, b.first);
                            });
}

int IndexSet::band_width() const {
  int best = 0;
  std::size_t i = 0;
  while (i < pairs.size()) {
    std::size_t j = i;
    while (j < pairs.size() && pairs[j].second == pairs[i].second) ++j;
    best = std::max(best, static_cast<int>(j - i));
    i = j;
  }
  return best;
}

std::vector<double> lobatto_nodes(int n) {
  std::vector<double> x(n + 1);
  // sin form is symmetric and exact at the midpoint, unlike cos(pi j / n)
  for (int j = 0; j <= n; ++j) x[j] = std::sin(std::numbers::pi * (n - 2.0 * j) / (2.0 * n));
  return x;
}

namespace {

// FFTW planning is not thread-safe; execution on distinct plans is.
std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

void check_finite(const std::vector<cplx>& s) {
  for (const cplx& v : s)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw NumericalError("non-finite sample in Chebyshev transform");
}

// Real DCT-I of the real and imaginary parts; rank 1 or 2.
std::vector<cplx> dct1(int n, int rank, const std::vector<cplx>& samples) {
  const std::size_t m = rank == 1 ? std::size_t(n + 1) : std::size_t(n + 1) * (n + 1);
  if (samples.size() != m) throw ConfigError("transform: sample grid has wrong size");
  check_finite(samples);
  double* in = fftw_alloc_real(m);
  double* out = fftw_alloc_real(m);
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_mutex());
    plan = rank == 1 ? fftw_plan_r2r_1d(n + 1, in, out, FFTW_REDFT00, FFTW_ESTIMATE)
                     : fftw_plan_r2r_2d(n + 1, n + 1, in, out, FFTW_REDFT00, FFTW_REDFT00,
                                        FFTW_ESTIMATE);
  }
  std::vector<cplx> res(m);
  for (int part = 0; part < 2; ++part) {
    for (std::size_t i = 0; i < m; ++i) in[i] = part == 0 ? samples[i].real() : samples[i].imag();
    fftw_execute(plan);
    for (std::size_t i = 0; i < m; ++i) {
      if (part == 0)
        res[i].real(out[i]);
      else
        res[i].imag(out[i]);
    }
  }
  {
    std::lock_guard lock(fftw_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);
  return res;
}

double edge_weight(int k, int n) { return (k == 0 || k == n) ? 0.5 : 1.0; }

}  // namespace

CoeffMatrix transform2d(int n, const std::vector<cplx>& samples) {
  if (n < 1) throw ConfigError("transform2d: n must be >= 1");
  std::vector<cplx> y = dct1(n, 2, samples);
  CoeffMatrix c(n);
  const double scale = 1.0 / (double(n) * n);
  for (int k1 = 0; k1 <= n; ++k1)
    for (int k2 = 0; k2 <= n; ++k2)
      c(k1, k2) = y[std::size_t(k1) * (n + 1) + k2] * (scale * edge_weight(k1, n) * edge_weight(k2, n));
  return c;
}

std::vector<cplx> transform1d(int n, const std::vector<cplx>& samples) {
  if (n < 1) throw ConfigError("transform1d: n must be >= 1");
  std::vector<cplx> y = dct1(n, 1, samples);
  for (int k = 0; k <= n; ++k) y[k] *= edge_weight(k, n) / n;
  return y;
}

CoeffMatrix coeffs_of(const std::function<cplx(double, double)>& f, int kmax) {
  const std::vector<double> x = lobatto_nodes(kmax);
  std::vector<cplx> s(std::size_t(kmax + 1) * (kmax + 1));
  for (int i = 0; i <= kmax; ++i)
    for (int j = 0; j <= kmax; ++j) s[std::size_t(i) * (kmax + 1) + j] = f(x[i], x[j]);
  return transform2d(kmax, s);
}

CoeffMatrix coeffs_of_F(const ConductivityParams& p, int kmax) {
  p.validate();
  return coeffs_of([&p](double a, double b) { return F_zeta(a, b, p); }, kmax);
}

double coeff_bound(const DecayRates& r, int k1, int k2) {
  return std::exp(-r.alpha_diag * (k1 + k2) - r.alpha_anti * std::abs(k1 - k2));
}

IndexSet truncation_set_rate(const DecayRates& r, double tau) {
  if (!(tau > 0.0)) throw ConfigError("truncation_set_rate: tau must be > 0");
  if (!(r.alpha_diag > 0.0)) throw ConfigError("truncation_set_rate: alpha_diag must be > 0");
  if (tau >= 1.0) return IndexSet::from_pairs({{0, 0}});
  // For k1 >= k2 the exponent is alpha_max k1 + alpha_min k2 >= k1 min(alpha_max, 2 alpha_diag).
  const double L = -std::log(tau);
  const double slope = std::min(r.alpha_diag + r.alpha_anti, 2.0 * r.alpha_diag);
  const int kcap = static_cast<int>(std::floor(L / slope)) + 1;
  std::vector<std::pair<int, int>> pairs;
  for (int k2 = 0; k2 <= kcap; ++k2)
    for (int k1 = 0; k1 <= kcap; ++k1)
      if (coeff_bound(r, k1, k2) >= tau) pairs.emplace_back(k1, k2);
  return IndexSet::from_pairs(std::move(pairs));
}

IndexSet truncation_set_greedy(const CoeffMatrix& c, double eps, double* dropped) {
  if (!(eps >= 0.0)) throw ConfigError("truncation_set_greedy: eps must be >= 0");
  struct Entry {
    double mag;
    int k1, k2;
  };
  std::vector<Entry> e;
  e.reserve(c.coeffs.size());
  for (int k1 = 0; k1 <= c.kmax; ++k1)
    for (int k2 = 0; k2 <= c.kmax; ++k2) e.push_back({std::abs(c(k1, k2)), k1, k2});
  std::sort(e.begin(), e.end(), [](const Entry& a, const Entry& b) {
    return std::tuple(a.mag, a.k1 + a.k2, a.k1) < std::tuple(b.mag, b.k1 + b.k2, b.k1);
  });
  double mass = 0.0;
  std::size_t i = 0;
  for (; i < e.size() && mass + e[i].mag < eps; ++i) mass += e[i].mag;
  if (dropped) *dropped = mass;
  std::vector<std::pair<int, int>> kept;
  kept.reserve(e.size() - i);
  for (; i < e.size(); ++i) kept.emplace_back(e[i].k1, e[i].k2);
  return IndexSet::from_pairs(std::move(kept));
}

double tau_for_eps(const DecayRates& r, double eps) {
  if (!(eps > 0.0)) throw ConfigError("tau_for_eps: eps must be > 0");
  const double anti = r.alpha_anti > 0.0 ? r.alpha_anti : r.alpha_diag;
  const double a = r.alpha_diag * anti * eps;
  return a / std::max(1.0, std::abs(std::log(a)));
}

cplx clenshaw(const cplx* c, int n, double x) {
  cplx b1 = 0.0, b2 = 0.0;
  for (int k = n - 1; k >= 1; --k) {
    const cplx b0 = c[k] + 2.0 * x * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return n == 0 ? cplx(0.0) : c[0] + x * b1 - b2;
}

cplx eval_series(const CoeffMatrix& c, const IndexSet& k, double e1, double e2) {
  if (k.empty()) return 0.0;
  const int n1 = k.max_k1() + 1, n2 = k.max_k2() + 1;
  std::vector<cplx> grid(std::size_t(n1) * n2, 0.0);
  for (const auto& [k1, k2] : k.pairs) {
    if (k1 > c.kmax || k2 > c.kmax) throw ConfigError("eval_series: index outside coefficient grid");
    grid[std::size_t(k1) * n2 + k2] = c(k1, k2);
  }
  std::vector<cplx> inner(n1);
  for (int k1 = 0; k1 < n1; ++k1) inner[k1] = clenshaw(grid.data() + std::size_t(k1) * n2, n2, e2);
  return clenshaw(inner.data(), n1, e1);
}

}  // namespace kubo

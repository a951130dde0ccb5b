#include "kubo/kpm.hpp"

#include <algorithm>
#include <optional>

#include "kubo/poles.hpp"

namespace kubo {

OpCounters& OpCounters::operator+=(const OpCounters& o) {
  matvecs += o.matvecs;
  inner_products += o.inner_products;
  resolvent_solves += o.resolvent_solves;
  velocity_products += o.velocity_products;
  peak_cached_vectors = std::max(peak_cached_vectors, o.peak_cached_vectors);
  return *this;
}

ChebyshevSequence::ChebyshevSequence(const SparseOperator& h, Vector v0, OpCounters* counters)
    : h_(&h), cur_(std::move(v0)), counters_(counters) {
  if (static_cast<int>(cur_.size()) != h.n) throw ConfigError("ChebyshevSequence: dimension mismatch");
}

void ChebyshevSequence::advance() {
  const auto& kern = simd::kernels();
  if (k_ == 0) {
    prev_.resize(cur_.size());
    kern.spmv(h_->view(), cur_.data(), prev_.data());
  } else {
    kern.cheb_step(h_->view(), cur_.data(), prev_.data());
  }
  std::swap(prev_, cur_);
  ++k_;
  if (counters_) ++counters_->matvecs;
}

std::vector<Vector> cheb_apply_sequence(const SparseOperator& h, const Vector& v0, int kmax,
                                        OpCounters* counters) {
  std::vector<Vector> out;
  ChebyshevSequence seq(h, v0, counters);
  out.push_back(seq.current());
  for (int k = 1; k <= kmax; ++k) {
    seq.advance();
    out.push_back(seq.current());
  }
  return out;
}

Vector unit_vector(int n, int i) {
  if (i < 0 || i >= n) throw ConfigError("seed index out of range");
  Vector e(n, 0.0);
  e[i] = 1.0;
  return e;
}

namespace {

void check_inputs(const SparseOperator& h, const SparseOperator& mp, const Vector& u0,
                  const Vector& w0, const CoeffMatrix& c, const IndexSet& k) {
  if (k.empty()) throw ConfigError("empty truncation set");
  if (mp.n != h.n || static_cast<int>(u0.size()) != h.n || static_cast<int>(w0.size()) != h.n)
    throw ConfigError("dimension mismatch between H, M_p and vectors");
  if (k.max_k1() > c.kmax || k.max_k2() > c.kmax)
    throw ConfigError("truncation set exceeds coefficient grid");
}

Vector apply(const SparseOperator& a, const Vector& x, OpCounters& cnt) {
  Vector y(x.size());
  simd::kernels().spmv(a.view(), x.data(), y.data());
  ++cnt.velocity_products;
  return y;
}

cplx bilinear_full(const SparseOperator& h, const SparseOperator& mp, const Vector& u0,
                   const Vector& w0, const CoeffMatrix& c, const IndexSet& k, OpCounters& cnt) {
  const auto& kern = simd::kernels();
  const int m1 = k.max_k1(), m2 = k.max_k2();
  std::vector<Vector> v(m1 + 1), w(m2 + 1);
  {
    ChebyshevSequence u(h, u0, &cnt);
    for (int k1 : k.k1s) {
      while (u.index() < k1) u.advance();
      v[k1] = apply(mp, u.current(), cnt);
    }
  }
  {
    ChebyshevSequence s(h, w0, &cnt);
    for (int k2 : k.k2s) {
      while (s.index() < k2) s.advance();
      w[k2] = s.current();
    }
  }
  cnt.peak_cached_vectors = std::max<std::int64_t>(
      cnt.peak_cached_vectors, std::int64_t(k.k1s.size() + k.k2s.size()) + 2);
  cplx acc = 0.0;
  for (const auto& [k1, k2] : k.pairs) {
    acc += c(k1, k2) * kern.dot(v[k1].data(), w[k2].data(), v[k1].size());
    ++cnt.inner_products;
  }
  return acc;
}

// Tracks how many length-n vectors are alive.
struct LiveCount {
  std::int64_t live = 0, peak = 0;
  void add(std::int64_t k = 1) {
    live += k;
    peak = std::max(peak, live);
  }
  void sub(std::int64_t k = 1) { live -= k; }
};

// One pass of the low-memory schedule. With dry = true only the vector
// bookkeeping runs, which is how the cheaper of the two schedules is picked:
// `precompute` builds every v vector before the first w step (the plain
// Algorithm 3), otherwise v vectors are produced just in time.
cplx bilinear_lowmem_pass(const SparseOperator& h, const SparseOperator& mp, const Vector& u0,
                          const Vector& w0, const CoeffMatrix& c, const IndexSet& k,
                          OpCounters& cnt, bool dry, bool precompute) {
  const auto& kern = simd::kernels();
  const int m1 = k.max_k1(), m2 = k.max_k2();
  const std::size_t n = u0.size();
  std::vector<int> last_use(m1 + 1, -1);
  for (const auto& [k1, k2] : k.pairs) last_use[k1] = std::max(last_use[k1], k2);

  LiveCount lv;
  std::vector<Vector> cache(m1 + 1);
  std::optional<ChebyshevSequence> u;
  bool u_alive = false;
  int next_k1 = 0;

  Vector w_prev, w_cur;
  lv.add();
  if (!dry) w_cur = w0;

  cplx acc = 0.0;
  std::size_t pi = 0;
  for (int k2 = 0; k2 <= m2; ++k2) {
    std::size_t pe = pi;
    while (pe < k.pairs.size() && k.pairs[pe].second == k2) ++pe;
    if (pe > pi) {
      const int hi = precompute ? m1 : k.pairs[pe - 1].first;
      while (next_k1 <= hi) {
        if (next_k1 == 0) {
          lv.add(2);
          u_alive = true;
          if (!dry) u.emplace(h, u0, &cnt);
        } else if (!dry) {
          u->advance();
        }
        if (last_use[next_k1] >= k2) {
          lv.add();
          if (!dry) cache[next_k1] = apply(mp, u->current(), cnt);
        }
        ++next_k1;
      }
      if (next_k1 > m1 && u_alive) {
        lv.sub(2);
        u_alive = false;
        u.reset();
      }
      for (std::size_t q = pi; q < pe; ++q) {
        const int k1 = k.pairs[q].first;
        if (!dry) {
          acc += c(k1, k2) * kern.dot(cache[k1].data(), w_cur.data(), n);
          ++cnt.inner_products;
        }
      }
      for (std::size_t q = pi; q < pe; ++q) {
        const int k1 = k.pairs[q].first;
        if (last_use[k1] == k2) {
          lv.sub();
          cache[k1] = Vector();
        }
      }
      pi = pe;
    }
    if (k2 == m2) break;
    // w_{k2+1} overwrites w_{k2-1} in place
    if (k2 == 0) {
      lv.add();
      if (!dry) {
        w_prev.resize(n);
        kern.spmv(h.view(), w_cur.data(), w_prev.data());
      }
    } else if (!dry) {
      kern.cheb_step(h.view(), w_cur.data(), w_prev.data());
    }
    if (!dry) {
      std::swap(w_prev, w_cur);
      ++cnt.matvecs;
    }
  }
  cnt.peak_cached_vectors = std::max(cnt.peak_cached_vectors, lv.peak);
  return acc;
}

}  // namespace

cplx chebyshev_bilinear(const SparseOperator& h, const SparseOperator& mp, const Vector& u0,
                        const Vector& w0, const CoeffMatrix& c, const IndexSet& k,
                        OpCounters& counters, bool lowmem) {
  check_inputs(h, mp, u0, w0, c, k);
  if (!lowmem) return bilinear_full(h, mp, u0, w0, c, k, counters);
  OpCounters a, b;
  bilinear_lowmem_pass(h, mp, u0, w0, c, k, a, true, false);
  bilinear_lowmem_pass(h, mp, u0, w0, c, k, b, true, true);
  const bool precompute = b.peak_cached_vectors < a.peak_cached_vectors;
  return bilinear_lowmem_pass(h, mp, u0, w0, c, k, counters, false, precompute);
}

EntryResult local_conductivity(const SparseOperator& h, const SparseOperator& mp,
                               const SparseOperator& mpp, const CoeffMatrix& c, const IndexSet& k,
                               int seed) {
  EntryResult r;
  const Vector e = unit_vector(h.n, seed);
  const Vector w0 = apply(mpp, e, r.counters);
  r.value = chebyshev_bilinear(h, mp, e, w0, c, k, r.counters, false);
  return r;
}

EntryResult local_conductivity_lowmem(const SparseOperator& h, const SparseOperator& mp,
                                      const SparseOperator& mpp, const CoeffMatrix& c,
                                      const IndexSet& k, int seed) {
  EntryResult r;
  const Vector e = unit_vector(h.n, seed);
  const Vector w0 = apply(mpp, e, r.counters);
  r.value = chebyshev_bilinear(h, mp, e, w0, c, k, r.counters, true);
  return r;
}

EntryResult weighted_local_conductivity(const SparseOperator& h, const SparseOperator& mp,
                                        const SparseOperator& mpp, const CoeffMatrix& c,
                                        const IndexSet& k, int seed,
                                        const std::vector<cplx>& poles, double resolvent_tol) {
  EntryResult r;
  std::vector<cplx> conj_poles;
  for (cplx z : poles) conj_poles.push_back(std::conj(z));
  const Vector e = unit_vector(h.n, seed);
  // <e| T q(H) M T q(H) M' |e>: the bra side needs conj(q)(H) e
  const Vector x = apply_pole_weight(h, conj_poles, e, resolvent_tol, &r.counters);
  const Vector y = apply_pole_weight(h, poles, apply(mpp, e, r.counters), resolvent_tol, &r.counters);
  r.value = chebyshev_bilinear(h, mp, x, y, c, k, r.counters, false);
  return r;
}

LocalConductivityResult local_conductivity_tensor(const LocalSystem& sys, const CoeffMatrix& c,
                                                  const IndexSet& k, bool lowmem) {
  LocalConductivityResult res;
  for (int p = 1; p <= 2; ++p)
    for (int pp = 1; pp <= 2; ++pp) {
      const EntryResult e =
          lowmem ? local_conductivity_lowmem(sys.h, sys.m[p - 1], sys.m[pp - 1], c, k, sys.seed())
                 : local_conductivity(sys.h, sys.m[p - 1], sys.m[pp - 1], c, k, sys.seed());
      res(p, pp) = e.value;
      res.entry_counters[2 * (p - 1) + (pp - 1)] = e.counters;
      res.counters += e.counters;
    }
  return res;
}

}  // namespace kubo

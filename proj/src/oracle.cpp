#include "kubo/oracle.hpp"

#include "dense_blas.hpp"

#include <cmath>
#include <numbers>

namespace kubo {

namespace {

void guard(int n) {
  if (n > kDenseSizeGuard)
    throw ConfigError("dense oracle size guard exceeded (n = " + std::to_string(n) + ")");
}

bool is_real_operator(const SparseOperator& a) {
  for (const cplx& v : a.values)
    if (v.imag() != 0.0) return false;
  return true;
}

// Y = A X for dense column-major X with ncols columns.
std::vector<cplx> sparse_times_dense(const SparseOperator& a, const std::vector<cplx>& x, int ncols) {
  std::vector<cplx> y(x.size());
  const auto& kern = simd::kernels();
  for (int c = 0; c < ncols; ++c)
    kern.spmv(a.view(), x.data() + std::size_t(c) * a.n, y.data() + std::size_t(c) * a.n);
  return y;
}

// G = V^H M V as a dense column-major complex matrix.
std::vector<cplx> velocity_in_eigenbasis(const EigenDecomposition& eig, const SparseOperator& m) {
  const int n = eig.n;
  std::vector<cplx> g(std::size_t(n) * n);
  if (eig.is_real && [&] {
        for (const cplx& v : m.values)
          if (v.real() != 0.0) return false;
        return true;
      }()) {
    // M = i D with D real: G = i V^T (D V)
    std::vector<double> dv(std::size_t(n) * n, 0.0);
    for (int c = 0; c < n; ++c)
      for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::int64_t k = m.row_offsets[i]; k < m.row_offsets[i + 1]; ++k)
          s += m.values[k].imag() * eig.real_vectors[std::size_t(c) * n + m.column_indices[k]];
        dv[std::size_t(c) * n + i] = s;
      }
    std::vector<double> gr(std::size_t(n) * n);
    dense::dgemm_tn(n, eig.real_vectors.data(), dv.data(), gr.data());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = cplx(0.0, gr[i]);
    return g;
  }
  std::vector<cplx> v(std::size_t(n) * n);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r) v[std::size_t(c) * n + r] = eig.v(r, c);
  const std::vector<cplx> mv = sparse_times_dense(m, v, n);
  dense::zgemm_hn(n, v.data(), mv.data(), g.data());
  return g;
}

}  // namespace

EigenDecomposition dense_eig(const SparseOperator& h) {
  guard(h.n);
  const int n = h.n;
  EigenDecomposition e;
  e.n = n;
  e.eigenvalues.resize(n);
  e.is_real = is_real_operator(h);
  if (e.is_real) {
    e.real_vectors.assign(std::size_t(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
      for (std::int64_t k = h.row_offsets[i]; k < h.row_offsets[i + 1]; ++k)
        e.real_vectors[std::size_t(h.column_indices[k]) * n + i] = h.values[k].real();
    const int info = dense::dsyevd(n, e.real_vectors.data(), e.eigenvalues.data());
    if (info != 0) throw NumericalError("dsyevd failed with info " + std::to_string(info));
  } else {
    e.vectors.assign(std::size_t(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
      for (std::int64_t k = h.row_offsets[i]; k < h.row_offsets[i + 1]; ++k)
        e.vectors[std::size_t(h.column_indices[k]) * n + i] = h.values[k];
    const int info = dense::zheevd(n, e.vectors.data(), e.eigenvalues.data());
    if (info != 0) throw NumericalError("zheevd failed with info " + std::to_string(info));
  }
  return e;
}

namespace {

// b_i = <v_i|M'|e> = sum_j conj(v_ji) M'_{j,seed}, with M'_{j,seed} = conj(M'_{seed,j})
std::vector<cplx> velocity_seed_column(const EigenDecomposition& eig, const SparseOperator& mpp,
                                       int seed) {
  std::vector<cplx> b(eig.n, 0.0);
  for (std::int64_t k = mpp.row_offsets[seed]; k < mpp.row_offsets[seed + 1]; ++k) {
    const int j = mpp.column_indices[k];
    const cplx m = std::conj(mpp.values[k]);
    for (int i = 0; i < eig.n; ++i) b[i] += std::conj(eig.v(j, i)) * m;
  }
  return b;
}

// phi_table[i2 * n + i1] = phi(e_i1, e_i2)
cplx spectral_sum(const EigenDecomposition& eig, const std::vector<cplx>& g,
                  const std::vector<cplx>& b, const std::vector<cplx>& phi_table, int seed) {
  const int n = eig.n;
  std::vector<cplx> a(n);
  for (int i = 0; i < n; ++i) a[i] = eig.v(seed, i);  // <e|v_i>
  cplx acc = 0.0;
  for (int i2 = 0; i2 < n; ++i2) {
    if (b[i2] == 0.0) continue;
    cplx inner = 0.0;
    const std::size_t col = std::size_t(i2) * n;
    for (int i1 = 0; i1 < n; ++i1) inner += phi_table[col + i1] * a[i1] * g[col + i1];
    acc += inner * b[i2];
  }
  return acc;
}

std::vector<cplx> tabulate(const EigenDecomposition& eig, const Kernel2& phi) {
  const int n = eig.n;
  std::vector<cplx> t(std::size_t(n) * n);
  for (int i2 = 0; i2 < n; ++i2)
    for (int i1 = 0; i1 < n; ++i1)
      t[std::size_t(i2) * n + i1] = phi(eig.eigenvalues[i1], eig.eigenvalues[i2]);
  return t;
}

void check_seed(const EigenDecomposition& eig, int seed) {
  if (seed < 0 || seed >= eig.n) throw ConfigError("oracle: seed out of range");
}

}  // namespace

cplx local_spectral_sum(const EigenDecomposition& eig, const SparseOperator& mp,
                        const SparseOperator& mpp, const Kernel2& phi, int seed) {
  if (mp.n != eig.n || mpp.n != eig.n) throw ConfigError("oracle: dimension mismatch");
  check_seed(eig, seed);
  return spectral_sum(eig, velocity_in_eigenbasis(eig, mp), velocity_seed_column(eig, mpp, seed),
                      tabulate(eig, phi), seed);
}

cplx local_conductivity_exact(const SparseOperator& h, const SparseOperator& mp,
                              const SparseOperator& mpp, const ConductivityParams& p, int seed) {
  p.validate();
  const EigenDecomposition eig = dense_eig(h);
  return local_spectral_sum(eig, mp, mpp, [&p](double a, double b) { return F_zeta(a, b, p); }, seed);
}

std::array<cplx, 4> local_conductivity_exact_tensor(const LocalSystem& sys,
                                                    const ConductivityParams& p) {
  p.validate();
  const EigenDecomposition eig = dense_eig(sys.h);
  check_seed(eig, sys.seed());
  const std::vector<cplx> table =
      tabulate(eig, [&p](double a, double b) { return F_zeta(a, b, p); });
  const std::array<std::vector<cplx>, 2> g{velocity_in_eigenbasis(eig, sys.m[0]),
                                           velocity_in_eigenbasis(eig, sys.m[1])};
  const std::array<std::vector<cplx>, 2> b{velocity_seed_column(eig, sys.m[0], sys.seed()),
                                           velocity_seed_column(eig, sys.m[1], sys.seed())};
  std::array<cplx, 4> out;
  for (int q = 0; q < 4; ++q) out[q] = spectral_sum(eig, g[q / 2], b[q % 2], table, sys.seed());
  return out;
}

std::array<cplx, 4> global_conductivity_exact(const SparseOperator& h,
                                              const std::array<SparseOperator, 2>& m,
                                              const ConductivityParams& p) {
  p.validate();
  const EigenDecomposition eig = dense_eig(h);
  const int n = eig.n;
  const std::array<std::vector<cplx>, 2> g{velocity_in_eigenbasis(eig, m[0]),
                                           velocity_in_eigenbasis(eig, m[1])};
  std::array<cplx, 4> out{};
  for (int q = 0; q < 4; ++q) {
    const auto& gp = g[q / 2];
    const auto& gpp = g[q % 2];
    cplx acc = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        acc += F_zeta(eig.eigenvalues[i], eig.eigenvalues[j], p) * gp[std::size_t(j) * n + i] *
               gpp[std::size_t(i) * n + j];
    out[q] = acc / double(n);
  }
  return out;
}

cplx cheb_coeffs_bruteforce(const Kernel2& f, int k1, int k2, int n_quad) {
  if (n_quad <= 2 * std::max(k1, k2)) throw ConfigError("cheb_coeffs_bruteforce: n_quad too small");
  // c = (2 - d_k1)(2 - d_k2) / N^2 sum f(x_i, x_j) T_k1(x_i) T_k2(x_j), x_i = cos(theta_i)
  std::vector<double> x(n_quad), t1(n_quad), t2(n_quad);
  for (int i = 0; i < n_quad; ++i) {
    const double th = std::numbers::pi * (i + 0.5) / n_quad;
    x[i] = std::cos(th);
    t1[i] = std::cos(k1 * th);
    t2[i] = std::cos(k2 * th);
  }
  cplx acc = 0.0;
  for (int i = 0; i < n_quad; ++i) {
    cplx row = 0.0;
    for (int j = 0; j < n_quad; ++j) row += f(x[i], x[j]) * t2[j];
    acc += row * t1[i];
  }
  const double w = (k1 == 0 ? 1.0 : 2.0) * (k2 == 0 ? 1.0 : 2.0) / (double(n_quad) * n_quad);
  return acc * w;
}

}  // namespace kubo

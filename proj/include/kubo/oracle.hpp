#pragma once

#include <array>
#include <functional>

#include "kubo/confunc.hpp"
#include "kubo/hamiltonian.hpp"

namespace kubo {

inline constexpr int kDenseSizeGuard = 5000;

// Column-major eigenvectors. When H is real symmetric the vectors are real
// and kept in `real_vectors`; otherwise in `vectors`.
struct EigenDecomposition {
  int n = 0;
  std::vector<double> eigenvalues;  // ascending
  bool is_real = false;
  std::vector<double> real_vectors;
  std::vector<cplx> vectors;

  cplx v(int row, int col) const {
    const std::size_t i = std::size_t(col) * n + row;
    return is_real ? cplx(real_vectors[i], 0.0) : vectors[i];
  }
};

EigenDecomposition dense_eig(const SparseOperator& h);

using Kernel2 = std::function<cplx(double, double)>;

// sum_{i1,i2} phi(e_i1, e_i2) <e|v_i1> <v_i1|M_p|v_i2> <v_i2|M_p'|e>
cplx local_conductivity_exact(const SparseOperator& h, const SparseOperator& mp,
                              const SparseOperator& mpp, const ConductivityParams& p, int seed);
cplx local_spectral_sum(const EigenDecomposition& eig, const SparseOperator& mp,
                        const SparseOperator& mpp, const Kernel2& phi, int seed);
std::array<cplx, 4> local_conductivity_exact_tensor(const LocalSystem& sys,
                                                    const ConductivityParams& p);

// (1/n) sum F(e_i, e_i') <v_i|M_p|v_i'> <v_i'|M_p'|v_i>
std::array<cplx, 4> global_conductivity_exact(const SparseOperator& h,
                                              const std::array<SparseOperator, 2>& m,
                                              const ConductivityParams& p);

// One coefficient by tensor Gauss-Chebyshev quadrature with n_quad nodes per axis.
cplx cheb_coeffs_bruteforce(const Kernel2& f, int k1, int k2, int n_quad);

}  // namespace kubo

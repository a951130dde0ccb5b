#pragma once

// Dense eigensolvers and GEMM from OpenBLAS, loaded on first use.
//
// OpenBLAS 0.3.20 (the Ubuntu 22.04 build) picks its Cooperlake kernels on
// CPUs with AVX512-BF16 and those return wrong dgemm results for n >~ 300.
// The kernel set is fixed when the library initialises, so it is loaded
// with dlopen after pinning OPENBLAS_CORETYPE=SkylakeX on such CPUs (unless
// the user already chose a core), and a dgemm self-check guards the rest.

#include <complex>

namespace kubo::dense {

// Column-major, LAPACK conventions; return LAPACK's info.
int dsyevd(int n, double* a, double* w);
int zheevd(int n, std::complex<double>* a, double* w);
// C = op(A) B with op = transpose / conjugate transpose, all n x n.
void dgemm_tn(int n, const double* a, const double* b, double* c);
void zgemm_hn(int n, const std::complex<double>* a, const std::complex<double>* b,
              std::complex<double>* c);

const char* core_name();

}  // namespace kubo::dense

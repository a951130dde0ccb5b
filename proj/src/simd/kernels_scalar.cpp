#include "kubo/simd.hpp"

namespace kubo::simd {
namespace {

// Explicit real arithmetic: std::complex operator* goes through the
// Annex G NaN-recovery path, which is several times slower.
cplx dot(const cplx* x, const cplx* y, std::size_t n) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    const double yr = y[i].real(), yi = y[i].imag();
    re += xr * yr + xi * yi;
    im += xr * yi - xi * yr;
  }
  return {re, im};
}

void axpy(cplx a, const cplx* x, cplx* y, std::size_t n) {
  const double ar = a.real(), ai = a.imag();
  for (std::size_t i = 0; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    y[i] = {y[i].real() + ar * xr - ai * xi, y[i].imag() + ar * xi + ai * xr};
  }
}

inline cplx row_product(const CsrView& a, const cplx* x, int i) {
  double re = 0.0, im = 0.0;
  for (std::int64_t k = a.offsets[i]; k < a.offsets[i + 1]; ++k) {
    const cplx v = a.vals[k];
    const cplx u = x[a.cols[k]];
    re += v.real() * u.real() - v.imag() * u.imag();
    im += v.real() * u.imag() + v.imag() * u.real();
  }
  return {re, im};
}

void spmv(const CsrView& a, const cplx* x, cplx* y) {
  for (int i = 0; i < a.n; ++i) y[i] = row_product(a, x, i);
}

void cheb_step(const CsrView& a, const cplx* x, cplx* y) {
  for (int i = 0; i < a.n; ++i) {
    const cplx s = row_product(a, x, i);
    y[i] = {2.0 * s.real() - y[i].real(), 2.0 * s.imag() - y[i].imag()};
  }
}

}  // namespace

namespace detail {
const Kernels scalar_kernels{dot, axpy, spmv, cheb_step};
}

}  // namespace kubo::simd

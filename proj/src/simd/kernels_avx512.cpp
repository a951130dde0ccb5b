#include <immintrin.h>

#include "kubo/simd.hpp"

// Four complex doubles per zmm register.

namespace kubo::simd {
namespace {

inline const double* dp(const cplx* p) { return reinterpret_cast<const double*>(p); }
inline double* dp(cplx* p) { return reinterpret_cast<double*>(p); }

cplx dot(const cplx* x, const cplx* y, std::size_t n) {
  __m512d acc_r = _mm512_setzero_pd();
  __m512d acc_i = _mm512_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m512d xv = _mm512_loadu_pd(dp(x + i));
    const __m512d yv = _mm512_loadu_pd(dp(y + i));
    acc_r = _mm512_fmadd_pd(xv, yv, acc_r);
    acc_i = _mm512_fmadd_pd(xv, _mm512_permute_pd(yv, 0x55), acc_i);
  }
  alignas(64) double r[8], m[8];
  _mm512_store_pd(r, acc_r);
  _mm512_store_pd(m, acc_i);
  double re = ((r[0] + r[1]) + (r[2] + r[3])) + ((r[4] + r[5]) + (r[6] + r[7]));
  double im = ((m[0] - m[1]) + (m[2] - m[3])) + ((m[4] - m[5]) + (m[6] - m[7]));
  for (; i < n; ++i) {
    re += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
    im += x[i].real() * y[i].imag() - x[i].imag() * y[i].real();
  }
  return {re, im};
}

void axpy(cplx a, const cplx* x, cplx* y, std::size_t n) {
  const __m512d ar = _mm512_set1_pd(a.real());
  const __m512d ai = _mm512_set1_pd(a.imag());
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m512d xv = _mm512_loadu_pd(dp(x + i));
    const __m512d yv = _mm512_loadu_pd(dp(y + i));
    const __m512d t = _mm512_mul_pd(ai, _mm512_permute_pd(xv, 0x55));
    _mm512_storeu_pd(dp(y + i), _mm512_add_pd(yv, _mm512_fmaddsub_pd(ar, xv, t)));
  }
  for (; i < n; ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    y[i] = {y[i].real() + a.real() * xr - a.imag() * xi,
            y[i].imag() + a.real() * xi + a.imag() * xr};
  }
}

inline __m128d row_product(const CsrView& a, const cplx* x, int i) {
  std::int64_t k = a.offsets[i];
  const std::int64_t end = a.offsets[i + 1];
  const double* xb = dp(x);
  __m512d acc = _mm512_setzero_pd();
  for (; k + 4 <= end; k += 4) {
    const __m512d v = _mm512_loadu_pd(dp(a.vals + k));
    const int c0 = 2 * a.cols[k], c1 = 2 * a.cols[k + 1];
    const int c2 = 2 * a.cols[k + 2], c3 = 2 * a.cols[k + 3];
    const __m256i idx = _mm256_set_epi32(c3 + 1, c3, c2 + 1, c2, c1 + 1, c1, c0 + 1, c0);
    const __m512d u = _mm512_i32gather_pd(idx, xb, 8);
    const __m512d t = _mm512_mul_pd(_mm512_permute_pd(v, 0xFF), _mm512_permute_pd(u, 0x55));
    acc = _mm512_add_pd(acc, _mm512_fmaddsub_pd(_mm512_movedup_pd(v), u, t));
  }
  const __m256d h = _mm256_add_pd(_mm512_castpd512_pd256(acc), _mm512_extractf64x4_pd(acc, 1));
  __m128d s = _mm_add_pd(_mm256_castpd256_pd128(h), _mm256_extractf128_pd(h, 1));
  for (; k < end; ++k) {
    const __m128d v = _mm_loadu_pd(dp(a.vals + k));
    const __m128d u = _mm_loadu_pd(dp(x + a.cols[k]));
    const __m128d t = _mm_mul_pd(_mm_permute_pd(v, 0x3), _mm_permute_pd(u, 0x1));
    s = _mm_add_pd(s, _mm_fmaddsub_pd(_mm_movedup_pd(v), u, t));
  }
  return s;
}

void spmv(const CsrView& a, const cplx* x, cplx* y) {
  for (int i = 0; i < a.n; ++i) _mm_storeu_pd(dp(y + i), row_product(a, x, i));
}

void cheb_step(const CsrView& a, const cplx* x, cplx* y) {
  const __m128d two = _mm_set1_pd(2.0);
  for (int i = 0; i < a.n; ++i) {
    const __m128d s = row_product(a, x, i);
    _mm_storeu_pd(dp(y + i), _mm_fmsub_pd(two, s, _mm_loadu_pd(dp(y + i))));
  }
}

}  // namespace

namespace detail {
const Kernels avx512_kernels{dot, axpy, spmv, cheb_step};
}

}  // namespace kubo::simd

#include <immintrin.h>

#include "kubo/simd.hpp"

// Two complex doubles per ymm register, laid out [re0 im0 re1 im1].

namespace kubo::simd {
namespace {

inline const double* dp(const cplx* p) { return reinterpret_cast<const double*>(p); }
inline double* dp(cplx* p) { return reinterpret_cast<double*>(p); }

cplx dot(const cplx* x, const cplx* y, std::size_t n) {
  __m256d acc_r = _mm256_setzero_pd();  // xr*yr, xi*yi
  __m256d acc_i = _mm256_setzero_pd();  // xr*yi, xi*yr
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(dp(x + i));
    const __m256d yv = _mm256_loadu_pd(dp(y + i));
    acc_r = _mm256_fmadd_pd(xv, yv, acc_r);
    acc_i = _mm256_fmadd_pd(xv, _mm256_permute_pd(yv, 0x5), acc_i);
  }
  alignas(32) double r[4], m[4];
  _mm256_store_pd(r, acc_r);
  _mm256_store_pd(m, acc_i);
  double re = (r[0] + r[1]) + (r[2] + r[3]);
  double im = (m[0] - m[1]) + (m[2] - m[3]);
  for (; i < n; ++i) {
    re += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
    im += x[i].real() * y[i].imag() - x[i].imag() * y[i].real();
  }
  return {re, im};
}

void axpy(cplx a, const cplx* x, cplx* y, std::size_t n) {
  const __m256d ar = _mm256_set1_pd(a.real());
  const __m256d ai = _mm256_set1_pd(a.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d xv = _mm256_loadu_pd(dp(x + i));
    const __m256d yv = _mm256_loadu_pd(dp(y + i));
    const __m256d t = _mm256_mul_pd(ai, _mm256_permute_pd(xv, 0x5));
    const __m256d prod = _mm256_fmaddsub_pd(ar, xv, t);
    _mm256_storeu_pd(dp(y + i), _mm256_add_pd(yv, prod));
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
  __m256d acc = _mm256_setzero_pd();
  for (; k + 2 <= end; k += 2) {
    const __m256d v = _mm256_loadu_pd(dp(a.vals + k));
    const __m256d u = _mm256_set_m128d(_mm_loadu_pd(dp(x + a.cols[k + 1])),
                                       _mm_loadu_pd(dp(x + a.cols[k])));
    const __m256d t = _mm256_mul_pd(_mm256_permute_pd(v, 0xF), _mm256_permute_pd(u, 0x5));
    acc = _mm256_add_pd(acc, _mm256_fmaddsub_pd(_mm256_movedup_pd(v), u, t));
  }
  __m128d s = _mm_add_pd(_mm256_castpd256_pd128(acc), _mm256_extractf128_pd(acc, 1));
  if (k < end) {
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
const Kernels avx2_kernels{dot, axpy, spmv, cheb_step};
}

}  // namespace kubo::simd

#pragma once

#include <cstddef>
#include <string>

#include "kubo/common.hpp"

namespace kubo::simd {

enum class Isa { Scalar, Avx2, Avx512 };

struct CsrView {
  int n = 0;
  const std::int64_t* offsets = nullptr;
  const std::int32_t* cols = nullptr;
  const cplx* vals = nullptr;
};

// The hot loops of the Chebyshev recurrences. Every variant computes the
// same sums in a fixed order per ISA, so a given build is bit-reproducible.
struct Kernels {
  // sum_i conj(x_i) y_i
  cplx (*dot)(const cplx* x, const cplx* y, std::size_t n);
  // y += a x
  void (*axpy)(cplx a, const cplx* x, cplx* y, std::size_t n);
  // y = A x
  void (*spmv)(const CsrView& a, const cplx* x, cplx* y);
  // y = 2 A x - y, in place on y
  void (*cheb_step)(const CsrView& a, const cplx* x, cplx* y);
};

bool isa_supported(Isa isa);
const Kernels& kernels_for(Isa isa);

// Chosen once from cpuid; KUBO_SIMD=scalar|avx2|avx512 overrides.
Isa active_isa();
const Kernels& kernels();
void set_active_isa(Isa isa);

std::string isa_name(Isa isa);

namespace detail {
extern const Kernels scalar_kernels;
extern const Kernels avx2_kernels;
extern const Kernels avx512_kernels;
}  // namespace detail

}  // namespace kubo::simd

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "kubo/simd.hpp"

namespace kubo::simd {

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    case Isa::Avx512:
      return __builtin_cpu_supports("avx512f") && __builtin_cpu_supports("fma");
  }
  return false;
}

const Kernels& kernels_for(Isa isa) {
  switch (isa) {
    case Isa::Avx2:
      return detail::avx2_kernels;
    case Isa::Avx512:
      return detail::avx512_kernels;
    default:
      return detail::scalar_kernels;
  }
}

std::string isa_name(Isa isa) {
  switch (isa) {
    case Isa::Avx2:
      return "avx2";
    case Isa::Avx512:
      return "avx512";
    default:
      return "scalar";
  }
}

namespace {

Isa detect() {
  if (const char* env = std::getenv("KUBO_SIMD")) {
    for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Avx512})
      if (isa_name(isa) == env && isa_supported(isa)) return isa;
  }
  // AVX2 is preferred over AVX-512: SpMV rows hold at most 16 nonzeros, and
  // on them the 512-bit gathers ran no faster than scalar code (0.40 vs
  // 0.22 ms per recurrence step at n = 13122).
  if (isa_supported(Isa::Avx2)) return Isa::Avx2;
  return Isa::Scalar;
}

std::atomic<int>& current() {
  static std::atomic<int> isa{static_cast<int>(detect())};
  return isa;
}

}  // namespace

Isa active_isa() { return static_cast<Isa>(current().load()); }

const Kernels& kernels() { return kernels_for(active_isa()); }

void set_active_isa(Isa isa) {
  if (!isa_supported(isa)) throw ConfigError("ISA not supported on this CPU: " + isa_name(isa));
  current().store(static_cast<int>(isa));
}

}  // namespace kubo::simd

#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kernels_internal.hpp"

namespace cady::simd {

namespace {

constexpr KernelTable kScalar{Isa::Scalar, scalar::gemm_nn, scalar::gemm_nt, scalar::gemm_tn,
                              scalar::axpy};
#if defined(__x86_64__) || defined(_M_X64)
constexpr KernelTable kAvx2{Isa::Avx2, avx2::gemm_nn, avx2::gemm_nt, avx2::gemm_tn, avx2::axpy};
#endif
#if defined(__aarch64__)
constexpr KernelTable kNeon{Isa::Neon, neon::gemm_nn, neon::gemm_nt, neon::gemm_tn, neon::axpy};
#endif

const KernelTable& select() {
  if (const char* forced = std::getenv("CADY_SIMD")) {
    if (std::string(forced) == "scalar") return kScalar;
  }
#if defined(__x86_64__) || defined(_M_X64)
  if (avx2::supported()) return kAvx2;
#endif
#if defined(__aarch64__)
  return kNeon;
#endif
  return kScalar;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return avx2::supported();
#else
      return false;
#endif
    case Isa::Neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& kernels_for(Isa isa) {
  if (!isa_supported(isa)) {
    throw std::invalid_argument("SIMD ISA not supported here: " + std::string(isa_name(isa)));
  }
  switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::Avx2: return kAvx2;
#endif
#if defined(__aarch64__)
    case Isa::Neon: return kNeon;
#endif
    default: return kScalar;
  }
}

const KernelTable& kernels() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace cady::simd

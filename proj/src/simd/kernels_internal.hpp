#pragma once

#include <cstddef>

#include "cady/simd/kernels.hpp"

namespace cady::simd {

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
void gemm_nn(const double*, const double*, double*, std::size_t, std::size_t, std::size_t);
void gemm_nt(const double*, const double*, double*, std::size_t, std::size_t, std::size_t);
void gemm_tn(const double*, const double*, double*, std::size_t, std::size_t, std::size_t);
void axpy(double, const double*, double*, std::size_t);
bool supported();
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
void gemm_nn(const double*, const double*, double*, std::size_t, std::size_t, std::size_t);
void gemm_nt(const double*, const double*, double*, std::size_t, std::size_t, std::size_t);
void gemm_tn(const double*, const double*, double*, std::size_t, std::size_t, std::size_t);
void axpy(double, const double*, double*, std::size_t);
bool supported();
}  // namespace neon
#endif

}  // namespace cady::simd

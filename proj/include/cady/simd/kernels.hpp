#pragma once

// Dense double-precision kernels used by the autodiff tape and by batched
// model inference. Every kernel has a scalar reference implementation; wider
// variants (AVX2+FMA on x86-64, NEON on AArch64) are selected at runtime.
//
// All matrices are row-major and every kernel ACCUMULATES into C.

#include <cstddef>
#include <string_view>

namespace cady::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa);

struct KernelTable {
  Isa isa;
  // C(m,n) += A(m,k) * B(k,n)
  void (*gemm_nn)(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                  std::size_t n);
  // C(m,n) += A(m,k) * B(n,k)^T
  void (*gemm_nt)(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                  std::size_t n);
  // C(m,n) += A(k,m)^T * B(k,n)
  void (*gemm_tn)(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                  std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
};

bool isa_supported(Isa isa);

// Table for a specific ISA. Throws std::invalid_argument if the ISA is not
// supported by this CPU/build.
const KernelTable& kernels_for(Isa isa);

// The best supported table, chosen once. Setting CADY_SIMD=scalar in the
// environment forces the reference kernels.
const KernelTable& kernels();

namespace scalar {
void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n);
void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n);
void gemm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
}  // namespace scalar

}  // namespace cady::simd

// NEON (AArch64 Advanced SIMD, 2 x f64 lanes) kernels.

#include "kernels_internal.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace cady::simd::neon {

namespace {

inline void axpy_row(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t av = vdupq_n_f64(alpha);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    float64x2_t y0 = vld1q_f64(y + j);
    float64x2_t y1 = vld1q_f64(y + j + 2);
    y0 = vfmaq_f64(y0, av, vld1q_f64(x + j));
    y1 = vfmaq_f64(y1, av, vld1q_f64(x + j + 2));
    vst1q_f64(y + j, y0);
    vst1q_f64(y + j + 2, y1);
  }
  for (; j + 2 <= n; j += 2) {
    vst1q_f64(y + j, vfmaq_f64(vld1q_f64(y + j), av, vld1q_f64(x + j)));
  }
  for (; j < n; ++j) y[j] += alpha * x[j];
}

}  // namespace

void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) axpy_row(a[i * k + p], b + p * n, c + i * n, n);
  }
}

void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const double* brow = b + j * k;
      float64x2_t acc = vdupq_n_f64(0.0);
      std::size_t p = 0;
      for (; p + 2 <= k; p += 2) acc = vfmaq_f64(acc, vld1q_f64(arow + p), vld1q_f64(brow + p));
      double s = vaddvq_f64(acc);
      for (; p < k; ++p) s += arow[p] * brow[p];
      c[i * n + j] += s;
    }
  }
}

void gemm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n) {
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t i = 0; i < m; ++i) axpy_row(a[p * m + i], b + p * n, c + i * n, n);
  }
}

void axpy(double alpha, const double* x, double* y, std::size_t n) { axpy_row(alpha, x, y, n); }

bool supported() { return true; }

}  // namespace cady::simd::neon

#endif

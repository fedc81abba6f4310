// AVX2 + FMA kernels. Compiled with per-function target attributes so the
// rest of the library stays baseline x86-64; only called after a CPUID check.

#include "kernels_internal.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#define CADY_AVX2 __attribute__((target("avx2,fma")))

namespace cady::simd::avx2 {

namespace {

CADY_AVX2 inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

// y[0..n) += alpha * x[0..n)
CADY_AVX2 inline void axpy_row(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    __m256d y0 = _mm256_loadu_pd(y + j);
    __m256d y1 = _mm256_loadu_pd(y + j + 4);
    y0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + j), y0);
    y1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + j + 4), y1);
    _mm256_storeu_pd(y + j, y0);
    _mm256_storeu_pd(y + j + 4, y1);
  }
  for (; j + 4 <= n; j += 4) {
    __m256d y0 = _mm256_loadu_pd(y + j);
    y0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + j), y0);
    _mm256_storeu_pd(y + j, y0);
  }
  for (; j < n; ++j) y[j] += alpha * x[j];
}

}  // namespace

CADY_AVX2 void gemm_nn(const double* a, const double* b, double* c, std::size_t m,
                       std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) axpy_row(a[i * k + p], b + p * n, crow, n);
  }
}

CADY_AVX2 void gemm_nt(const double* a, const double* b, double* c, std::size_t m,
                       std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const double* brow = b + j * k;
      __m256d acc = _mm256_setzero_pd();
      std::size_t p = 0;
      for (; p + 4 <= k; p += 4) {
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(arow + p), _mm256_loadu_pd(brow + p), acc);
      }
      double s = hsum(acc);
      for (; p < k; ++p) s += arow[p] * brow[p];
      c[i * n + j] += s;
    }
  }
}

CADY_AVX2 void gemm_tn(const double* a, const double* b, double* c, std::size_t m,
                       std::size_t k, std::size_t n) {
  for (std::size_t p = 0; p < k; ++p) {
    const double* arow = a + p * m;
    const double* brow = b + p * n;
    for (std::size_t i = 0; i < m; ++i) axpy_row(arow[i], brow, c + i * n, n);
  }
}

CADY_AVX2 void axpy(double alpha, const double* x, double* y, std::size_t n) {
  axpy_row(alpha, x, y, n);
}

bool supported() {
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

}  // namespace cady::simd::avx2

#endif

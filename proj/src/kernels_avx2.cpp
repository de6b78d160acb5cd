// AVX2+FMA kernel variants. This translation unit is compiled with -mavx2
// -mfma and must only be reached through the runtime dispatch in kernels.cpp.

#include "tfqkd/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

#include <cassert>

namespace tfqkd::kern::avx2 {

double dot(std::span<const double> x, std::span<const double> y) {
  assert(x.size() == y.size());
  std::size_t n = x.size(), i = 0;
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(&x[i]), _mm256_loadu_pd(&y[i]), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(&x[i + 4]), _mm256_loadu_pd(&y[i + 4]), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(&x[i]), _mm256_loadu_pd(&y[i]), acc0);
  __m256d acc = _mm256_add_pd(acc0, acc1);
  __m128d lo = _mm256_castpd256_pd128(acc);
  __m128d hi = _mm256_extractf128_pd(acc, 1);
  __m128d s2 = _mm_add_pd(lo, hi);
  double r = _mm_cvtsd_f64(_mm_add_sd(s2, _mm_unpackhi_pd(s2, s2)));
  for (; i < n; ++i) r += x[i] * y[i];
  return r;
}

double sum(std::span<const double> x) {
  std::size_t n = x.size(), i = 0;
  __m256d acc = _mm256_setzero_pd();
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(&x[i]));
  __m128d lo = _mm256_castpd256_pd128(acc);
  __m128d hi = _mm256_extractf128_pd(acc, 1);
  __m128d s2 = _mm_add_pd(lo, hi);
  double r = _mm_cvtsd_f64(_mm_add_sd(s2, _mm_unpackhi_pd(s2, s2)));
  for (; i < n; ++i) r += x[i];
  return r;
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  std::size_t n = x.size(), i = 0;
  __m256d va = _mm256_set1_pd(a);
  for (; i + 4 <= n; i += 4) {
    __m256d r = _mm256_fmadd_pd(va, _mm256_loadu_pd(&x[i]), _mm256_loadu_pd(&y[i]));
    _mm256_storeu_pd(&y[i], r);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scale(double a, std::span<double> y) {
  std::size_t n = y.size(), i = 0;
  __m256d va = _mm256_set1_pd(a);
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(&y[i], _mm256_mul_pd(va, _mm256_loadu_pd(&y[i])));
  for (; i < n; ++i) y[i] *= a;
}

}  // namespace tfqkd::kern::avx2

#endif

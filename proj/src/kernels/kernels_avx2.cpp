#include <immintrin.h>

#include <cstddef>

#include "rtrb/kernels.hpp"

namespace rtrb::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

// 4x4 row-major block times a 4-vector; lanes of the result are the rows.
inline __m256d gemv4(const double* a, const double* x) {
  // columns of A gathered as rows of A^T: y = sum_c A[:,c] * x[c]
  __m256d r0 = _mm256_loadu_pd(a);
  __m256d r1 = _mm256_loadu_pd(a + 4);
  __m256d r2 = _mm256_loadu_pd(a + 8);
  __m256d r3 = _mm256_loadu_pd(a + 12);
  __m256d xv = _mm256_loadu_pd(x);
  __m256d p0 = _mm256_mul_pd(r0, xv);
  __m256d p1 = _mm256_mul_pd(r1, xv);
  __m256d p2 = _mm256_mul_pd(r2, xv);
  __m256d p3 = _mm256_mul_pd(r3, xv);
  __m256d s01 = _mm256_hadd_pd(p0, p1);  // (p0a+p0b, p1a+p1b, p0c+p0d, p1c+p1d)
  __m256d s23 = _mm256_hadd_pd(p2, p3);
  __m256d lo = _mm256_permute2f128_pd(s01, s23, 0x20);
  __m256d hi = _mm256_permute2f128_pd(s01, s23, 0x31);
  return _mm256_add_pd(lo, hi);
}

}  // namespace

double dot(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  std::size_t i = 0;
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(&x[i]), _mm256_loadu_pd(&y[i]), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(&x[i + 4]), _mm256_loadu_pd(&y[i + 4]), acc1);
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(&x[i]), _mm256_loadu_pd(&y[i]), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  const std::size_t n = x.size();
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d yv = _mm256_loadu_pd(&y[i]);
    _mm256_storeu_pd(&y[i], _mm256_fmadd_pd(av, _mm256_loadu_pd(&x[i]), yv));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void weighted_sum(std::span<const double> w, std::span<const double* const> cols, std::span<double> y) {
  const std::size_t n = y.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t j = 0; j < w.size(); ++j)
      acc = _mm256_fmadd_pd(_mm256_set1_pd(w[j]), _mm256_loadu_pd(cols[j] + i), acc);
    _mm256_storeu_pd(&y[i], acc);
  }
  for (; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * cols[j][i];
    y[i] = s;
  }
}

void block_gemv(std::span<const double> a, std::span<const double> x, std::span<double> y) {
  if (x.size() == 4) {
    _mm256_storeu_pd(y.data(), gemv4(a.data(), x.data()));
    return;
  }
  scalar::block_gemv(a, x, y);
}

void block_gemv_sub(std::span<const double> a, std::span<const double> x, std::span<double> y) {
  if (x.size() == 4) {
    __m256d yv = _mm256_loadu_pd(y.data());
    _mm256_storeu_pd(y.data(), _mm256_sub_pd(yv, gemv4(a.data(), x.data())));
    return;
  }
  scalar::block_gemv_sub(a, x, y);
}

}  // namespace rtrb::kernels::avx2

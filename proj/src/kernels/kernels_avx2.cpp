#include "bikecast/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <limits>

// AVX2 kernels. This translation unit is compiled with -mavx2 and must only
// be entered after the dispatcher confirmed CPU support. Each routine mirrors
// the scalar reference lane for lane: one ymm register holds the four logical
// accumulator lanes, tails run the scalar lane code, and no fma is emitted.

namespace bikecast::kernels {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sum_avx2(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  for (std::size_t p = 0; i < n; ++i, ++p) lanes[p] += a[i];
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, prod);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  for (std::size_t p = 0; i < n; ++i, ++p) lanes[p] += a[i] * b[i];
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

void axpy_avx2(double* y, double alpha, const double* x, std::size_t n) {
  __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void add_avx2(double* out, const double* a, const double* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i,
                     _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void mul_avx2(double* out, const double* a, const double* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i,
                     _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void centered_moments_avx2(const double* x, const double* y, double mean_x,
                           double mean_y, std::size_t n, double out[3]) {
  __m256d mx = _mm256_set1_pd(mean_x), my = _mm256_set1_pd(mean_y);
  __m256d sxy = _mm256_setzero_pd(), sxx = _mm256_setzero_pd(),
          syy = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d cx = _mm256_sub_pd(_mm256_loadu_pd(x + i), mx);
    __m256d cy = _mm256_sub_pd(_mm256_loadu_pd(y + i), my);
    sxy = _mm256_add_pd(sxy, _mm256_mul_pd(cx, cy));
    sxx = _mm256_add_pd(sxx, _mm256_mul_pd(cx, cx));
    syy = _mm256_add_pd(syy, _mm256_mul_pd(cy, cy));
  }
  alignas(32) double lxy[4], lxx[4], lyy[4];
  _mm256_store_pd(lxy, sxy);
  _mm256_store_pd(lxx, sxx);
  _mm256_store_pd(lyy, syy);
  for (std::size_t p = 0; i < n; ++i, ++p) {
    double cx = x[i] - mean_x;
    double cy = y[i] - mean_y;
    lxy[p] += cx * cy;
    lxx[p] += cx * cx;
    lyy[p] += cy * cy;
  }
  out[0] = (lxy[0] + lxy[1]) + (lxy[2] + lxy[3]);
  out[1] = (lxx[0] + lxx[1]) + (lxx[2] + lxx[3]);
  out[2] = (lyy[0] + lyy[1]) + (lyy[2] + lyy[3]);
}

// The warp recurrence is serial in j, so a single pair gains nothing from
// vectorization; the scalar routine is reused directly.
double dtw_pair_avx2(const double* x, std::size_t n, const double* y,
                     std::size_t m, long band, double abandon_above,
                     double* scratch) {
  return scalar_ops().dtw_pair(x, n, y, m, band, abandon_above, scratch);
}

// Four warps advance in lockstep, one lane per y sequence. Lane arithmetic is
// the exact scalar op sequence, so with abandonment disabled the results are
// bit-identical to four scalar calls. Abandonment is cooperative: only when
// all four row minima exceed the bound does the batch stop (all +inf).
void dtw_batch4_avx2(const double* x, std::size_t n, const double* const ys[4],
                     std::size_t m, long band, double abandon_above,
                     double out[4], double* scratch) {
  double* yt = scratch;              // ys interleaved, yt[4j + lane]
  double* prev = scratch + 4 * m;    // rows interleaved, row[4j + lane]
  double* cur = prev + 4 * (m + 1);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t l = 0; l < 4; ++l) yt[4 * j + l] = ys[l][j];

  const __m256d vinf = _mm256_set1_pd(kInf);
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const __m256d vbound = _mm256_set1_pd(abandon_above);

  _mm256_storeu_pd(prev, _mm256_setzero_pd());
  for (std::size_t j = 1; j <= m; ++j) _mm256_storeu_pd(prev + 4 * j, vinf);

  for (std::size_t i = 1; i <= n; ++i) {
    std::size_t jlo = 1, jhi = m;
    if (band >= 0) {
      if (i > std::size_t(band) + 1) jlo = i - std::size_t(band);
      jhi = std::min(m, i + std::size_t(band));
    }
    _mm256_storeu_pd(cur + 4 * (jlo - 1), vinf);
    __m256d xi = _mm256_set1_pd(x[i - 1]);
    __m256d row_min = vinf;
    __m256d left = vinf;  // cur[j-1], carried through the row
    for (std::size_t j = jlo; j <= jhi; ++j) {
      __m256d cost =
          _mm256_andnot_pd(sign_mask, _mm256_sub_pd(xi, _mm256_loadu_pd(yt + 4 * (j - 1))));
      __m256d up = _mm256_loadu_pd(prev + 4 * j);
      __m256d diag = _mm256_loadu_pd(prev + 4 * (j - 1));
      __m256d best = _mm256_min_pd(_mm256_min_pd(up, diag), left);
      __m256d v = _mm256_add_pd(cost, best);
      _mm256_storeu_pd(cur + 4 * j, v);
      row_min = _mm256_min_pd(row_min, v);
      left = v;
    }
    if (jhi < m) _mm256_storeu_pd(cur + 4 * (jhi + 1), vinf);
    __m256d over = _mm256_cmp_pd(row_min, vbound, _CMP_GT_OQ);
    if (_mm256_movemask_pd(over) == 0xF) {
      for (int l = 0; l < 4; ++l) out[l] = kInf;
      return;
    }
    std::swap(prev, cur);
  }
  for (int l = 0; l < 4; ++l) out[l] = prev[4 * m + l];
}

constexpr Ops kAvx2Ops = {
    "avx2",        sum_avx2,      dot_avx2,
    axpy_avx2,     add_avx2,      mul_avx2,
    centered_moments_avx2, dtw_pair_avx2, dtw_batch4_avx2,
};

}  // namespace

const Ops& avx2_ops() { return kAvx2Ops; }

}  // namespace bikecast::kernels

#endif  // x86-64

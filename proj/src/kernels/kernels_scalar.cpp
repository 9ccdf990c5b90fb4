#include "bikecast/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

// Scalar reference kernels. The 4-lane accumulator pattern here is the
// contract every SIMD backend reproduces bit for bit.

namespace bikecast::kernels {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sum_scalar(const double* a, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc[0] += a[i];
    acc[1] += a[i + 1];
    acc[2] += a[i + 2];
    acc[3] += a[i + 3];
  }
  for (std::size_t p = 0; i < n; ++i, ++p) acc[p] += a[i];
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc[0] += a[i] * b[i];
    acc[1] += a[i + 1] * b[i + 1];
    acc[2] += a[i + 2] * b[i + 2];
    acc[3] += a[i + 3] * b[i + 3];
  }
  for (std::size_t p = 0; i < n; ++i, ++p) acc[p] += a[i] * b[i];
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

void axpy_scalar(double* y, double alpha, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void add_scalar(double* out, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void mul_scalar(double* out, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void centered_moments_scalar(const double* x, const double* y, double mean_x,
                             double mean_y, std::size_t n, double out[3]) {
  double sxy[4] = {0, 0, 0, 0}, sxx[4] = {0, 0, 0, 0}, syy[4] = {0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    for (std::size_t p = 0; p < 4; ++p) {
      double cx = x[i + p] - mean_x;
      double cy = y[i + p] - mean_y;
      sxy[p] += cx * cy;
      sxx[p] += cx * cx;
      syy[p] += cy * cy;
    }
  }
  for (std::size_t p = 0; i < n; ++i, ++p) {
    double cx = x[i] - mean_x;
    double cy = y[i] - mean_y;
    sxy[p] += cx * cy;
    sxx[p] += cx * cx;
    syy[p] += cy * cy;
  }
  out[0] = (sxy[0] + sxy[1]) + (sxy[2] + sxy[3]);
  out[1] = (sxx[0] + sxx[1]) + (sxx[2] + sxx[3]);
  out[2] = (syy[0] + syy[1]) + (syy[2] + syy[3]);
}

// Two rolling rows over the (n+1) x (m+1) table. Cells outside the band stay
// +inf; since the band window shifts by at most one column per row, writing
// the inf sentinels just outside the current window keeps every cell the next
// row reads well defined without refilling whole rows.
double dtw_pair_scalar(const double* x, std::size_t n, const double* y,
                       std::size_t m, long band, double abandon_above,
                       double* scratch) {
  double* prev = scratch;
  double* cur = scratch + (m + 1);
  prev[0] = 0.0;
  std::fill(prev + 1, prev + m + 1, kInf);
  for (std::size_t i = 1; i <= n; ++i) {
    std::size_t jlo = 1, jhi = m;
    if (band >= 0) {
      if (i > std::size_t(band) + 1) jlo = i - std::size_t(band);
      jhi = std::min(m, i + std::size_t(band));
    }
    cur[jlo - 1] = kInf;
    double row_min = kInf;
    for (std::size_t j = jlo; j <= jhi; ++j) {
      double cost = std::fabs(x[i - 1] - y[j - 1]);
      double best = std::min(std::min(prev[j], prev[j - 1]), cur[j - 1]);
      double v = cost + best;
      cur[j] = v;
      row_min = std::min(row_min, v);
    }
    if (jhi < m) cur[jhi + 1] = kInf;
    // Every admissible path crosses each row, so row_min bounds the result
    // from below; strict comparison keeps boundary ties exact.
    if (row_min > abandon_above) return kInf;
    std::swap(prev, cur);
  }
  return prev[m];
}

void dtw_batch4_scalar(const double* x, std::size_t n,
                       const double* const ys[4], std::size_t m, long band,
                       double abandon_above, double out[4], double* scratch) {
  for (int l = 0; l < 4; ++l)
    out[l] = dtw_pair_scalar(x, n, ys[l], m, band, abandon_above, scratch);
}

constexpr Ops kScalarOps = {
    "scalar",          sum_scalar,      dot_scalar,
    axpy_scalar,       add_scalar,      mul_scalar,
    centered_moments_scalar, dtw_pair_scalar, dtw_batch4_scalar,
};

}  // namespace

const Ops& scalar_ops() { return kScalarOps; }

}  // namespace bikecast::kernels

#include "bikecast/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

#include <algorithm>
#include <cmath>
#include <limits>

// NEON kernels. float64x2 gives two lanes, so the four logical accumulator
// lanes live in a register pair (lanes 0-1, 2-3). abs is sub-then-abs and min
// is vminq, matching the scalar op sequence bit for bit.

namespace bikecast::kernels {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sum_neon(const double* a, std::size_t n) {
  float64x2_t a01 = vdupq_n_f64(0.0), a23 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    a01 = vaddq_f64(a01, vld1q_f64(a + i));
    a23 = vaddq_f64(a23, vld1q_f64(a + i + 2));
  }
  double lanes[4] = {vgetq_lane_f64(a01, 0), vgetq_lane_f64(a01, 1),
                     vgetq_lane_f64(a23, 0), vgetq_lane_f64(a23, 1)};
  for (std::size_t p = 0; i < n; ++i, ++p) lanes[p] += a[i];
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t a01 = vdupq_n_f64(0.0), a23 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    a01 = vaddq_f64(a01, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    a23 = vaddq_f64(a23, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
  }
  double lanes[4] = {vgetq_lane_f64(a01, 0), vgetq_lane_f64(a01, 1),
                     vgetq_lane_f64(a23, 0), vgetq_lane_f64(a23, 1)};
  for (std::size_t p = 0; i < n; ++i, ++p) lanes[p] += a[i] * b[i];
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

void axpy_neon(double* y, double alpha, const double* x, std::size_t n) {
  float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void add_neon(double* out, const double* a, const double* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i, vaddq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void mul_neon(double* out, const double* a, const double* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void centered_moments_neon(const double* x, const double* y, double mean_x,
                           double mean_y, std::size_t n, double out[3]) {
  float64x2_t mx = vdupq_n_f64(mean_x), my = vdupq_n_f64(mean_y);
  float64x2_t xy01 = vdupq_n_f64(0.0), xy23 = vdupq_n_f64(0.0);
  float64x2_t xx01 = vdupq_n_f64(0.0), xx23 = vdupq_n_f64(0.0);
  float64x2_t yy01 = vdupq_n_f64(0.0), yy23 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    float64x2_t cx01 = vsubq_f64(vld1q_f64(x + i), mx);
    float64x2_t cx23 = vsubq_f64(vld1q_f64(x + i + 2), mx);
    float64x2_t cy01 = vsubq_f64(vld1q_f64(y + i), my);
    float64x2_t cy23 = vsubq_f64(vld1q_f64(y + i + 2), my);
    xy01 = vaddq_f64(xy01, vmulq_f64(cx01, cy01));
    xy23 = vaddq_f64(xy23, vmulq_f64(cx23, cy23));
    xx01 = vaddq_f64(xx01, vmulq_f64(cx01, cx01));
    xx23 = vaddq_f64(xx23, vmulq_f64(cx23, cx23));
    yy01 = vaddq_f64(yy01, vmulq_f64(cy01, cy01));
    yy23 = vaddq_f64(yy23, vmulq_f64(cy23, cy23));
  }
  double lxy[4] = {vgetq_lane_f64(xy01, 0), vgetq_lane_f64(xy01, 1),
                   vgetq_lane_f64(xy23, 0), vgetq_lane_f64(xy23, 1)};
  double lxx[4] = {vgetq_lane_f64(xx01, 0), vgetq_lane_f64(xx01, 1),
                   vgetq_lane_f64(xx23, 0), vgetq_lane_f64(xx23, 1)};
  double lyy[4] = {vgetq_lane_f64(yy01, 0), vgetq_lane_f64(yy01, 1),
                   vgetq_lane_f64(yy23, 0), vgetq_lane_f64(yy23, 1)};
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

double dtw_pair_neon(const double* x, std::size_t n, const double* y,
                     std::size_t m, long band, double abandon_above,
                     double* scratch) {
  return scalar_ops().dtw_pair(x, n, y, m, band, abandon_above, scratch);
}

void dtw_batch4_neon(const double* x, std::size_t n, const double* const ys[4],
                     std::size_t m, long band, double abandon_above,
                     double out[4], double* scratch) {
  double* yt = scratch;
  double* prev = scratch + 4 * m;
  double* cur = prev + 4 * (m + 1);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t l = 0; l < 4; ++l) yt[4 * j + l] = ys[l][j];

  const float64x2_t vinf = vdupq_n_f64(kInf);
  const float64x2_t vbound = vdupq_n_f64(abandon_above);

  vst1q_f64(prev, vdupq_n_f64(0.0));
  vst1q_f64(prev + 2, vdupq_n_f64(0.0));
  for (std::size_t j = 1; j <= m; ++j) {
    vst1q_f64(prev + 4 * j, vinf);
    vst1q_f64(prev + 4 * j + 2, vinf);
  }

  for (std::size_t i = 1; i <= n; ++i) {
    std::size_t jlo = 1, jhi = m;
    if (band >= 0) {
      if (i > std::size_t(band) + 1) jlo = i - std::size_t(band);
      jhi = std::min(m, i + std::size_t(band));
    }
    vst1q_f64(cur + 4 * (jlo - 1), vinf);
    vst1q_f64(cur + 4 * (jlo - 1) + 2, vinf);
    float64x2_t xi = vdupq_n_f64(x[i - 1]);
    float64x2_t rm0 = vinf, rm1 = vinf;
    float64x2_t left0 = vinf, left1 = vinf;
    for (std::size_t j = jlo; j <= jhi; ++j) {
      float64x2_t cost0 = vabsq_f64(vsubq_f64(xi, vld1q_f64(yt + 4 * (j - 1))));
      float64x2_t cost1 = vabsq_f64(vsubq_f64(xi, vld1q_f64(yt + 4 * (j - 1) + 2)));
      float64x2_t best0 = vminq_f64(
          vminq_f64(vld1q_f64(prev + 4 * j), vld1q_f64(prev + 4 * (j - 1))), left0);
      float64x2_t best1 = vminq_f64(
          vminq_f64(vld1q_f64(prev + 4 * j + 2), vld1q_f64(prev + 4 * (j - 1) + 2)),
          left1);
      float64x2_t v0 = vaddq_f64(cost0, best0);
      float64x2_t v1 = vaddq_f64(cost1, best1);
      vst1q_f64(cur + 4 * j, v0);
      vst1q_f64(cur + 4 * j + 2, v1);
      rm0 = vminq_f64(rm0, v0);
      rm1 = vminq_f64(rm1, v1);
      left0 = v0;
      left1 = v1;
    }
    if (jhi < m) {
      vst1q_f64(cur + 4 * (jhi + 1), vinf);
      vst1q_f64(cur + 4 * (jhi + 1) + 2, vinf);
    }
    uint64x2_t over0 = vcgtq_f64(rm0, vbound);
    uint64x2_t over1 = vcgtq_f64(rm1, vbound);
    if (vgetq_lane_u64(over0, 0) && vgetq_lane_u64(over0, 1) &&
        vgetq_lane_u64(over1, 0) && vgetq_lane_u64(over1, 1)) {
      for (int l = 0; l < 4; ++l) out[l] = kInf;
      return;
    }
    std::swap(prev, cur);
  }
  for (int l = 0; l < 4; ++l) out[l] = prev[4 * m + l];
}

constexpr Ops kNeonOps = {
    "neon",        sum_neon,      dot_neon,
    axpy_neon,     add_neon,      mul_neon,
    centered_moments_neon, dtw_pair_neon, dtw_batch4_neon,
};

}  // namespace

const Ops& neon_ops() { return kNeonOps; }

}  // namespace bikecast::kernels

#endif  // aarch64

#pragma once

#include <cstddef>
#include <vector>

// Numeric inner-loop kernels, available as a scalar reference implementation
// and as SIMD variants (AVX2 on x86-64, NEON on aarch64) selected at runtime.
//
// Every backend follows one arithmetic contract and must produce bit-identical
// results to the scalar reference:
//   - reductions run in 4 logical lanes, lane p accumulating elements i+p,
//     reduced as (acc0 + acc1) + (acc2 + acc3), remainder folded into lanes
//     0..r-1 after the vector loop;
//   - multiply and add stay separate ops (no fma; build with -ffp-contract=off);
//   - elementwise ops are pure per-slot arithmetic.
// The equivalence tests assert bitwise equality, not closeness.

namespace bikecast::kernels {

enum class Backend { scalar, avx2, neon };

struct Ops {
  const char* name;

  double (*sum)(const double* a, std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double* y, double alpha, const double* x, std::size_t n);
  void (*add)(double* out, const double* a, const double* b, std::size_t n);
  void (*mul)(double* out, const double* a, const double* b, std::size_t n);
  // out = { sum (x-mx)(y-my), sum (x-mx)^2, sum (y-my)^2 }
  void (*centered_moments)(const double* x, const double* y, double mean_x,
                           double mean_y, std::size_t n, double out[3]);

  // Dynamic time warping distance with |.| local cost and steps
  // {(1,0),(0,1),(1,1)}. band < 0 disables the window; otherwise cells with
  // |i-j| > band are unreachable (caller guarantees band >= |n-m|).
  // If every cell of some row exceeds abandon_above, returns +infinity; the
  // true distance is then provably > abandon_above. Pass +infinity to force
  // an exact result. scratch: dtw_scratch_size(m) doubles.
  double (*dtw_pair)(const double* x, std::size_t n, const double* y,
                     std::size_t m, long band, double abandon_above,
                     double* scratch);
  // Four warps against one x, all y of equal length m. Per lane the op
  // sequence matches dtw_pair exactly, except abandonment triggers only when
  // all four lanes' row minima exceed abandon_above (then all return +inf).
  // scratch: dtw_batch4_scratch_size(m) doubles.
  void (*dtw_batch4)(const double* x, std::size_t n, const double* const ys[4],
                     std::size_t m, long band, double abandon_above,
                     double out[4], double* scratch);
};

constexpr std::size_t dtw_scratch_size(std::size_t m) { return 2 * (m + 1); }
constexpr std::size_t dtw_batch4_scratch_size(std::size_t m) {
  return 8 * (m + 1) + 4 * m;
}

const Ops& scalar_ops();

bool backend_available(Backend b);
std::vector<Backend> available_backends();
const char* backend_name(Backend b);

// Process-wide active table. select() fails (returns false) when the backend
// is not compiled in or the CPU lacks it. select_auto() honors the
// BIKECAST_SIMD environment variable ("scalar", "avx2", "neon") and otherwise
// picks the best available backend.
const Ops& active();
bool select(Backend b);
void select_auto();

}  // namespace bikecast::kernels

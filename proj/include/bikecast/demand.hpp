#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bikecast/common.hpp"

namespace bikecast {

// Hourly pick-up counts on a w x h grid: values[idx(k,i,j)] is the number of
// trips departing cell (i,j) during bin k. Layout is bin-major, then i, then
// j, so one bin is a contiguous w*h frame in row-major cell order.
struct DemandTensor {
  int width = 0;
  int height = 0;
  std::int64_t t0 = 0;
  std::int64_t time_bin_s = 3600;
  std::int64_t bins = 0;
  double scale_max = 0.0;  // 0 until a scaling constant is attached
  std::vector<std::uint32_t> values;

  std::size_t cells() const { return std::size_t(width) * std::size_t(height); }
  std::size_t idx(std::int64_t k, int i, int j) const {
    return (std::size_t(k) * std::size_t(width) + std::size_t(i - 1)) *
               std::size_t(height) +
           std::size_t(j - 1);
  }
  std::uint32_t& at(std::int64_t k, int i, int j) { return values[idx(k, i, j)]; }
  std::uint32_t at(std::int64_t k, int i, int j) const {
    return values[idx(k, i, j)];
  }

  // flat row-major cell index, no time component
  std::size_t cell_index(int i, int j) const {
    return std::size_t(i - 1) * std::size_t(height) + std::size_t(j - 1);
  }

  // 1 for cells with at least one nonzero bin over the tensor's horizon
  std::vector<std::uint8_t> active_mask() const;
  std::vector<double> cell_series(int i, int j) const;
  std::uint32_t max_value() const;

  static DemandTensor zeros(int width, int height, std::int64_t bins,
                            std::int64_t t0, std::int64_t time_bin_s);
};

// Demand mapped into [-1, 1] by v = 2x/M - 1 with M = scale_max taken from
// the training split. Validation values above M map above 1 on purpose.
struct ScaledTensor {
  int width = 0;
  int height = 0;
  std::int64_t t0 = 0;
  std::int64_t time_bin_s = 3600;
  std::int64_t bins = 0;
  double scale_max = 0.0;
  std::vector<double> values;

  std::size_t cells() const { return std::size_t(width) * std::size_t(height); }
  std::size_t idx(std::int64_t k, int i, int j) const {
    return (std::size_t(k) * std::size_t(width) + std::size_t(i - 1)) *
               std::size_t(height) +
           std::size_t(j - 1);
  }
  const double* frame(std::int64_t k) const { return values.data() + std::size_t(k) * cells(); }
};

// Chronological prefix/suffix split; the boundary is floor(ratio * bins).
// When min_train_bins > 0 the training prefix must reach it (callers pass the
// model's maximum lookback so at least one training sample exists).
std::pair<DemandTensor, DemandTensor> split_train_val(const DemandTensor& d,
                                                      double ratio,
                                                      std::int64_t min_train_bins = 0);

ScaledTensor scale(const DemandTensor& d, double train_max);
// Inverts scale and clamps below 0 for reporting.
std::vector<double> unscale(const ScaledTensor& s);

// Text header + little-endian uint32 payload.
void save_tensor(const DemandTensor& d, const std::string& path);
DemandTensor load_tensor(const std::string& path);

}  // namespace bikecast

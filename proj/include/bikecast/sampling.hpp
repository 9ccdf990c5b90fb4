#pragma once

#include <cstdint>
#include <vector>

#include "bikecast/demand.hpp"

namespace bikecast {

// Three historical windows feed the model: the last l_c hours (closeness),
// the same hour of the last l_p days (period), and the same hour of the last
// l_q weeks (trend).
struct SamplingConfig {
  int l_c = 24;
  int l_p = 7;
  int l_q = 2;
  static constexpr int bins_per_day = 24;
  static constexpr int days_per_week = 7;

  // earliest target index with all three windows in range
  std::int64_t lookback() const {
    std::int64_t lb = l_c;
    lb = std::max<std::int64_t>(lb, std::int64_t(bins_per_day) * l_p);
    lb = std::max<std::int64_t>(lb, std::int64_t(bins_per_day) * days_per_week * l_q);
    return lb;
  }
  void validate() const;  // all >= 1
};

struct TrainingSample {
  std::int64_t t = 0;                  // target bin
  std::vector<std::int64_t> closeness;  // t-l_c .. t-1
  std::vector<std::int64_t> period;     // t-24*l_p, ..., t-24
  std::vector<std::int64_t> trend;      // t-168*l_q, ..., t-168
};

// One sample per target t in [t_lo, t_hi). Frame indices are ascending and
// all within [0, scaled.bins).
std::vector<TrainingSample> make_samples(const ScaledTensor& scaled,
                                         const SamplingConfig& cfg,
                                         std::int64_t t_lo, std::int64_t t_hi);

}  // namespace bikecast

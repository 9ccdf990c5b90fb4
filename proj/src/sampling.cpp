#include "bikecast/sampling.hpp"

namespace bikecast {

void SamplingConfig::validate() const {
  if (l_c < 1 || l_p < 1 || l_q < 1)
    throw ConfigError("sampling windows l_c, l_p, l_q must all be at least 1");
}

std::vector<TrainingSample> make_samples(const ScaledTensor& scaled,
                                         const SamplingConfig& cfg,
                                         std::int64_t t_lo, std::int64_t t_hi) {
  cfg.validate();
  const std::int64_t first_legal = cfg.lookback();
  if (t_lo < first_legal)
    throw DataError("target range starts at bin " + std::to_string(t_lo) +
                    " but the sampling windows need history back to t - " +
                    std::to_string(first_legal) + "; first legal target is " +
                    std::to_string(first_legal));
  if (t_hi > scaled.bins)
    throw DataError("target range ends at bin " + std::to_string(t_hi) +
                    " beyond the tensor's " + std::to_string(scaled.bins) + " bins");

  std::vector<TrainingSample> out;
  if (t_hi <= t_lo) return out;
  out.reserve(std::size_t(t_hi - t_lo));
  const std::int64_t day = SamplingConfig::bins_per_day;
  const std::int64_t week = day * SamplingConfig::days_per_week;
  for (std::int64_t t = t_lo; t < t_hi; ++t) {
    TrainingSample s;
    s.t = t;
    s.closeness.reserve(std::size_t(cfg.l_c));
    for (std::int64_t k = cfg.l_c; k >= 1; --k) s.closeness.push_back(t - k);
    s.period.reserve(std::size_t(cfg.l_p));
    for (std::int64_t k = cfg.l_p; k >= 1; --k) s.period.push_back(t - day * k);
    s.trend.reserve(std::size_t(cfg.l_q));
    for (std::int64_t k = cfg.l_q; k >= 1; --k) s.trend.push_back(t - week * k);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace bikecast

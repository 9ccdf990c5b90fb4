#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "bikecast/demand.hpp"
#include "bikecast/model.hpp"
#include "bikecast/sampling.hpp"

namespace bikecast {

// One evaluation slice. Metrics are absent (not zero) when no observation
// qualifies; MAPE runs only over observations with actual demand > 0 and is
// reported in percent.
struct MetricRow {
  std::string slice;  // overall, q1..q5, morning, evening
  std::int64_t n = 0;
  std::int64_t n_mape = 0;
  std::optional<double> mae;
  std::optional<double> rmse;
  std::optional<double> mape;

  void add(double actual, double predicted);
  void finalize();

  double sum_abs = 0.0, sum_sq = 0.0, sum_ape = 0.0;
};

struct EvalReport {
  std::string experiment_id;
  std::string model_kind;
  std::string metric;  // neighbor metric the model ran with
  std::int64_t target_lo = 0, target_hi = 0;
  std::vector<MetricRow> rows;

  const MetricRow& row(const std::string& slice) const;
  void write(std::ostream& out) const;
};

// Quintile index (0..4) per active cell by mean usage over the full horizon;
// boundaries at the 20/40/60/80th percentiles, ties to the lower quintile.
// Entries for inactive cells are -1.
std::vector<int> usage_quintiles(const DemandTensor& demand);

// Predictions are unscaled and clamped at zero, then compared against actual
// counts over active cells only. Slices: overall, usage quintiles q1 (lowest)
// to q5, and the morning [07,10) / evening [17,20) clock windows of the
// target bin. Per-sample forwards may run in parallel; accumulation order is
// fixed, so reports are byte-stable for any thread count.
EvalReport evaluate_model(const ForecastModel& model, const ScaledTensor& scaled,
                          const DemandTensor& demand,
                          std::span<const TrainingSample> samples,
                          const std::string& experiment_id, int threads);

void save_eval_report(const EvalReport& report, const std::string& path);

}  // namespace bikecast

#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "bikecast/checkpoint.hpp"
#include "bikecast/model.hpp"
#include "bikecast/optim.hpp"
#include "bikecast/sampling.hpp"

namespace bikecast {

struct TrainOptions {
  int epochs = 100;
  int batch_size = 32;
  RmsPropOptions optimizer;
  std::uint64_t seed = 0;
  int threads = 1;  // evaluation only; gradient accumulation stays sequential
};

struct EpochStats {
  int epoch = 0;  // 1-based
  double train_mse = 0.0;
  double val_mse = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> history;
  Checkpoint best;  // parameters at the lowest validation MSE
  int best_epoch = 0;
  double best_val_mse = 0.0;
};

// Mean per-sample MSE in the scaled domain, forward-only. Per-sample values
// land in fixed slots and reduce in index order, so the result is byte-stable
// for any thread count.
double dataset_mse(const ForecastModel& model, const ScaledTensor& scaled,
                   std::span<const TrainingSample> samples, int threads);

// Mini-batch RMSProp with a seeded shuffle per epoch. Batch gradients are the
// mean of per-sample gradients, accumulated in shuffle order; a non-finite
// loss aborts with diagnostics rather than training on garbage.
TrainResult train_model(ForecastModel& model, const ScaledTensor& scaled,
                        std::span<const TrainingSample> train,
                        std::span<const TrainingSample> val,
                        const TrainOptions& opt, std::ostream* log = nullptr);

void save_loss_history(const std::vector<EpochStats>& history,
                       const std::string& path);

}  // namespace bikecast

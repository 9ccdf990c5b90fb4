#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bikecast/autodiff.hpp"
#include "bikecast/checkpoint.hpp"
#include "bikecast/irconv.hpp"
#include "bikecast/lstm.hpp"
#include "bikecast/neighbors.hpp"
#include "bikecast/sampling.hpp"

namespace bikecast {

enum class ModelKind { irconv_lstm, cnn_lstm, lstm_only };

std::string to_string(ModelKind kind);
ModelKind model_kind_from(const std::string& name);

struct ModelConfig {
  int width = 0;
  int height = 0;
  int hidden = 128;                     // LSTM state size
  std::vector<int> filters = {32, 16, 1};  // conv stack widths, last must be 1
  SamplingConfig sampling;

  std::int64_t cells() const { return std::int64_t(width) * height; }
  void validate() const;
};

// Three branches (trend / period / closeness), each running the per-frame
// convolution stack, an LSTM over the window, and a linear head back to grid
// shape; the branch features combine through learnable per-cell weights under
// a final tanh. The cnn_lstm variant is the same computation driven by the
// spatial tap list; lstm_only drops the convolution and the trend/period
// branches, feeding raw flattened frames.
class ForecastModel {
 public:
  ForecastModel(ModelKind kind, const ModelConfig& cfg, NeighborIndex index,
                std::uint64_t seed);

  static ForecastModel restore(const Checkpoint& ck, const ModelConfig& cfg,
                               NeighborIndex index);

  // prediction for sample.t in the scaled domain, shape [cells], values in (-1,1)
  diff::Tensor forward(const ScaledTensor& scaled, const TrainingSample& sample) const;

  const std::vector<std::pair<std::string, diff::Tensor>>& named_params() const {
    return named_;
  }
  std::vector<diff::Tensor> params() const;

  // parameter snapshot; caller fills seed/step/epoch/scale_max
  Checkpoint snapshot() const;

  ModelKind kind() const { return kind_; }
  const ModelConfig& config() const { return cfg_; }
  const NeighborIndex& index() const { return index_; }

 private:
  struct Branch {
    std::vector<IrConvLayer> conv;
    LstmParams lstm;
    diff::Tensor head_w;  // [cells, hidden]
    diff::Tensor head_b;  // [cells, 1]
  };

  ForecastModel(ModelKind kind, const ModelConfig& cfg, NeighborIndex index);
  void init_params(std::uint64_t seed);
  void register_params();
  diff::Tensor branch_feature(const Branch& b, const ScaledTensor& scaled,
                              const std::vector<std::int64_t>& frames) const;

  ModelKind kind_;
  ModelConfig cfg_;
  NeighborIndex index_;
  std::vector<TapPlan> plans_;
  std::vector<Branch> branches_;          // trend, period, closeness order
  std::vector<diff::Tensor> fusion_;      // aligned with branches_
  std::vector<std::string> branch_names_;
  std::vector<std::pair<std::string, diff::Tensor>> named_;
  std::vector<std::int64_t> fans_;        // init fan-in, aligned with named_
};

}  // namespace bikecast

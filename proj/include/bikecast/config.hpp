#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "bikecast/eval.hpp"
#include "bikecast/model.hpp"
#include "bikecast/optim.hpp"
#include "bikecast/sampling.hpp"
#include "bikecast/train.hpp"

namespace bikecast {

// One experiment end to end: tensor in, trained checkpoint and reports out.
// Parsed from a JSON file; every field except the tensor path has a default.
struct ExperimentConfig {
  std::string experiment_id = "experiment";
  std::string tensor_path;
  double split_ratio = 0.8;

  std::string neighbor_metric = "dtw";  // pearson | dtw (ignored by baselines)
  int neighbor_k = 8;
  long dtw_band = -1;
  std::string neighbor_index_path;  // reuse a saved index instead of building

  ModelKind model_kind = ModelKind::irconv_lstm;
  int hidden = 128;
  std::vector<int> filters = {32, 16, 1};
  SamplingConfig sampling;

  RmsPropOptions optimizer;
  int epochs = 100;
  int batch_size = 32;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_dir = ".";

  void validate() const;
};

ExperimentConfig load_experiment_config(const std::string& path);

struct ExperimentResult {
  TrainResult training;
  EvalReport report;
  std::string checkpoint_path;
  std::string report_path;
  std::string history_path;
  std::string neighbors_path;
};

// split -> scale by the training max -> neighbor index -> samples -> train ->
// evaluate the best checkpoint -> write artifacts under cfg.out_dir.
ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                std::ostream* log = nullptr);

}  // namespace bikecast

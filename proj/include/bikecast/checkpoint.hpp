#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bikecast/autodiff.hpp"

namespace bikecast {

// Snapshot of a trained model: named parameter tensors in a fixed order plus
// the metadata needed to rebuild the forecasting pipeline around them.
// Serialization is byte-stable: a text manifest followed by the raw
// little-endian doubles in manifest order.
struct Checkpoint {
  std::string model_kind;  // "irconv_lstm", "cnn_lstm", "lstm_only"
  std::string metric;      // neighbor metric the model was trained with
  std::uint64_t seed = 0;
  std::int64_t step = 0;   // optimizer steps taken when this snapshot was made
  std::int64_t epoch = 0;
  double scale_max = 0.0;

  struct Entry {
    std::string name;
    diff::Shape shape;
    std::vector<double> data;
  };
  std::vector<Entry> entries;

  const Entry& find(const std::string& name) const;
};

void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace bikecast

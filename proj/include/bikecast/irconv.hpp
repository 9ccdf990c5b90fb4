#pragma once

#include <span>
#include <vector>

#include "bikecast/autodiff.hpp"
#include "bikecast/neighbors.hpp"

namespace bikecast {

// One irregular-convolution layer: every output channel owns one weight per
// (input channel, tap slot) pair plus a bias, applied identically at every
// cell but reading that cell's own tap list. With the spatial tap list this
// is exactly a zero-padded dense 3x3 convolution.
struct IrConvLayer {
  diff::Tensor kernel;  // [out_channels, in_channels * kernel_size]
  diff::Tensor bias;    // [out_channels, 1]
};

// Gather indices turning a channel-major frame [channels, cells] into the tap
// matrix [cells, channels * kernel_size]; sentinel taps map to -1 (zero value,
// no gradient).
struct TapPlan {
  std::int64_t cells = 0;
  std::int64_t channels = 0;
  std::int64_t kernel_size = 0;
  std::vector<std::int64_t> idx;
};

TapPlan make_tap_plan(const NeighborIndex& index, std::int64_t channels);

// input [channels, cells] -> [out_channels, cells]; linear, no activation.
diff::Tensor irconv_forward(const diff::Tensor& input, const IrConvLayer& layer,
                            const TapPlan& plan);

// Full stack: rectifier between layers, identity after the last. plans[k]
// must match layer k's input channel count.
diff::Tensor irconv_stack(const diff::Tensor& input,
                          std::span<const IrConvLayer> layers,
                          std::span<const TapPlan> plans);

}  // namespace bikecast

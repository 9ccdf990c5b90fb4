#include "bikecast/irconv.hpp"

#include <stdexcept>

namespace bikecast {

TapPlan make_tap_plan(const NeighborIndex& index, std::int64_t channels) {
  index.validate();
  if (channels < 1) throw std::invalid_argument("tap plan: channels must be positive");
  TapPlan plan;
  plan.cells = std::int64_t(index.cells());
  plan.channels = channels;
  plan.kernel_size = index.kernel_size;
  plan.idx.resize(std::size_t(plan.cells * channels * plan.kernel_size));
  std::size_t w = 0;
  for (std::int64_t n = 0; n < plan.cells; ++n) {
    const Cell* taps = index.entries.data() + std::size_t(n) * std::size_t(index.kernel_size);
    for (std::int64_t c = 0; c < channels; ++c) {
      for (std::int64_t s = 0; s < plan.kernel_size; ++s) {
        const Cell& t = taps[std::size_t(s)];
        plan.idx[w++] = t.sentinel()
                            ? -1
                            : c * plan.cells +
                                  (std::int64_t(t.i - 1) * index.height + (t.j - 1));
      }
    }
  }
  return plan;
}

diff::Tensor irconv_forward(const diff::Tensor& input, const IrConvLayer& layer,
                            const TapPlan& plan) {
  const auto& in_shape = input.shape();
  if (in_shape.size() != 2 || in_shape[0] != plan.channels || in_shape[1] != plan.cells)
    throw std::invalid_argument(
        "irconv: input " + diff::shape_str(in_shape) + " does not match plan [" +
        std::to_string(plan.channels) + "," + std::to_string(plan.cells) + "]");
  const auto& k_shape = layer.kernel.shape();
  if (k_shape.size() != 2 || k_shape[1] != plan.channels * plan.kernel_size)
    throw std::invalid_argument(
        "irconv: kernel " + diff::shape_str(k_shape) + " wants " +
        std::to_string(plan.channels * plan.kernel_size) + " taps per filter");

  diff::Tensor patch = diff::gather(input, plan.idx,
                                    {plan.cells, plan.channels * plan.kernel_size});
  diff::Tensor out = diff::matmul_nt(layer.kernel, patch);  // [F, cells]
  return diff::bias_add_rows(out, layer.bias);
}

diff::Tensor irconv_stack(const diff::Tensor& input,
                          std::span<const IrConvLayer> layers,
                          std::span<const TapPlan> plans) {
  if (layers.empty()) throw std::invalid_argument("irconv: empty stack");
  if (layers.size() != plans.size())
    throw std::invalid_argument("irconv: " + std::to_string(layers.size()) +
                                " layers but " + std::to_string(plans.size()) +
                                " tap plans");
  diff::Tensor h = input;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    h = irconv_forward(h, layers[l], plans[l]);
    if (l + 1 < layers.size()) h = diff::relu(h);
  }
  return h;
}

}  // namespace bikecast

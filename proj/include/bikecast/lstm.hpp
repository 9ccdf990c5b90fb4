#pragma once

#include <span>
#include <vector>

#include "bikecast/autodiff.hpp"

namespace bikecast {

// One LSTM cell with separate input-to-hidden and hidden-to-hidden weights
// and biases per gate:
//   f_t = sigmoid(W_if x_t + b_if + W_hf h_{t-1} + b_hf)
//   i_t = sigmoid(W_ii x_t + b_ii + W_hi h_{t-1} + b_hi)
//   g_t = tanh   (W_ic x_t + b_ic + W_hc h_{t-1} + b_hc)
//   o_t = sigmoid(W_io x_t + b_io + W_ho h_{t-1} + b_ho)
//   c_t = f_t * c_{t-1} + i_t * g_t
//   h_t = o_t * tanh(c_t)
// W_i*: [hidden, input], W_h*: [hidden, hidden], biases: [hidden, 1].
struct LstmParams {
  diff::Tensor w_if, w_hf, b_if, b_hf;
  diff::Tensor w_ii, w_hi, b_ii, b_hi;
  diff::Tensor w_ic, w_hc, b_ic, b_hc;
  diff::Tensor w_io, w_ho, b_io, b_ho;

  std::int64_t input_size() const { return w_if.shape()[1]; }
  std::int64_t hidden_size() const { return w_if.shape()[0]; }
};

struct LstmState {
  diff::Tensor h;  // [hidden, 1]
  diff::Tensor c;  // [hidden, 1]
};

LstmState zero_state(std::int64_t hidden);

// x: [input, 1]
LstmState lstm_step(const LstmParams& p, const diff::Tensor& x,
                    const LstmState& prev);

// Runs the cell over xs in order from the zero state; returns the final state.
LstmState lstm_over_sequence(const LstmParams& p, std::span<const diff::Tensor> xs);

}  // namespace bikecast

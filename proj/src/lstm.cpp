#include "bikecast/lstm.hpp"

#include <stdexcept>

namespace bikecast {

LstmState zero_state(std::int64_t hidden) {
  return {diff::Tensor::full({hidden, 1}, 0.0), diff::Tensor::full({hidden, 1}, 0.0)};
}

namespace {

diff::Tensor gate_preact(const diff::Tensor& w_i, const diff::Tensor& b_i,
                         const diff::Tensor& w_h, const diff::Tensor& b_h,
                         const diff::Tensor& x, const diff::Tensor& h) {
  return diff::add(diff::add(diff::matmul(w_i, x), b_i),
                   diff::add(diff::matmul(w_h, h), b_h));
}

}  // namespace

LstmState lstm_step(const LstmParams& p, const diff::Tensor& x,
                    const LstmState& prev) {
  if (x.shape().size() != 2 || x.shape()[1] != 1 || x.shape()[0] != p.input_size())
    throw std::invalid_argument("lstm: input " + diff::shape_str(x.shape()) +
                                " does not match weight shape " +
                                diff::shape_str(p.w_if.shape()));
  diff::Tensor f = diff::sigmoid(gate_preact(p.w_if, p.b_if, p.w_hf, p.b_hf, x, prev.h));
  diff::Tensor i = diff::sigmoid(gate_preact(p.w_ii, p.b_ii, p.w_hi, p.b_hi, x, prev.h));
  diff::Tensor g = diff::tanh(gate_preact(p.w_ic, p.b_ic, p.w_hc, p.b_hc, x, prev.h));
  diff::Tensor o = diff::sigmoid(gate_preact(p.w_io, p.b_io, p.w_ho, p.b_ho, x, prev.h));
  LstmState next;
  next.c = diff::add(diff::mul(f, prev.c), diff::mul(i, g));
  next.h = diff::mul(o, diff::tanh(next.c));
  return next;
}

LstmState lstm_over_sequence(const LstmParams& p, std::span<const diff::Tensor> xs) {
  if (xs.empty()) throw std::invalid_argument("lstm: empty sequence");
  LstmState state = zero_state(p.hidden_size());
  for (const diff::Tensor& x : xs) state = lstm_step(p, x, state);
  return state;
}

}  // namespace bikecast

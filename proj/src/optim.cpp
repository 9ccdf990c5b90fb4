#include "bikecast/optim.hpp"

#include <cmath>
#include <stdexcept>

#include "bikecast/common.hpp"

namespace bikecast {

RmsProp::RmsProp(std::vector<diff::Tensor> params, RmsPropOptions opts)
    : params_(std::move(params)), opts_(opts) {
  if (!(opts_.lr > 0.0)) throw ConfigError("rmsprop: lr must be positive");
  if (!(opts_.rho >= 0.0 && opts_.rho < 1.0))
    throw ConfigError("rmsprop: rho must lie in [0, 1)");
  if (!(opts_.eps > 0.0)) throw ConfigError("rmsprop: eps must be positive");
  v_.reserve(params_.size());
  for (const auto& p : params_) {
    if (!p.requires_grad())
      throw std::invalid_argument("rmsprop: parameter without gradients");
    v_.emplace_back(p.numel(), 0.0);
  }
}

void RmsProp::step() {
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& theta = params_[k].data();
    const auto& g = params_[k].grad();
    auto& v = v_[k];
    for (std::size_t i = 0; i < theta.size(); ++i) {
      v[i] = opts_.rho * v[i] + (1.0 - opts_.rho) * g[i] * g[i];
      theta[i] -= opts_.lr * g[i] / (std::sqrt(v[i]) + opts_.eps);
    }
    params_[k].zero_grad();
  }
  ++steps_;
}

const std::vector<double>& RmsProp::accumulator(std::size_t param_index) const {
  return v_.at(param_index);
}

}  // namespace bikecast

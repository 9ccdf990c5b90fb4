#pragma once

#include <cstdint>
#include <vector>

#include "bikecast/autodiff.hpp"

namespace bikecast {

struct RmsPropOptions {
  double lr = 1e-3;
  double rho = 0.9;
  double eps = 1e-8;
};

// Root-mean-square propagation:
//   v <- rho*v + (1-rho)*g^2
//   theta <- theta - lr * g / (sqrt(v) + eps)
// One accumulator per parameter slot, zero-initialized. step() consumes and
// zeroes the gradients, so callers accumulate into them freely between steps.
class RmsProp {
 public:
  RmsProp(std::vector<diff::Tensor> params, RmsPropOptions opts = {});

  void step();
  std::int64_t steps() const { return steps_; }
  const std::vector<double>& accumulator(std::size_t param_index) const;
  const RmsPropOptions& options() const { return opts_; }

 private:
  std::vector<diff::Tensor> params_;
  std::vector<std::vector<double>> v_;
  RmsPropOptions opts_;
  std::int64_t steps_ = 0;
};

}  // namespace bikecast

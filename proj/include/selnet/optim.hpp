// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>

#include "selnet/layers.hpp"

namespace selnet {

struct OptimizerState {
  double base_lr = 0.4637;
  std::size_t epoch = 0;
  std::size_t total_epochs = 584;
};

/// base_lr * (1 + cos(pi * epoch / total_epochs)) / 2.
double cosine_lr(const OptimizerState& state);

/// theta <- theta - lr * grad for every parameter (no momentum).
void sgd_step(std::span<const ParamRef> params, double lr);

void zero_grad(std::span<const ParamRef> params);

}  // namespace selnet

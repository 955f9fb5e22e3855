// SPDX-License-Identifier: Apache-2.0
#include "selnet/optim.hpp"

#include <cmath>
#include <numbers>

#include "selnet/errors.hpp"

namespace selnet {

double cosine_lr(const OptimizerState& state) {
  if (state.total_epochs == 0) throw PreconditionError("cosine_lr: total_epochs must be positive");
  if (state.epoch > state.total_epochs) {
    throw PreconditionError("cosine_lr: epoch " + std::to_string(state.epoch) + " exceeds total " +
                            std::to_string(state.total_epochs));
  }
  const double t = static_cast<double>(state.epoch) / static_cast<double>(state.total_epochs);
  return state.base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

void sgd_step(std::span<const ParamRef> params, double lr) {
  for (const auto& p : params) {
    require_same_shape(p.param->value, p.param->grad, (p.name + " value").c_str(),
                       (p.name + " gradient").c_str());
  }
  if (lr == 0.0) return;
  for (const auto& p : params) {
    auto v = p.param->value.values();
    auto g = p.param->grad.values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= lr * g[i];
  }
}

void zero_grad(std::span<const ParamRef> params) {
  for (const auto& p : params) p.param->zero_grad();
}

}  // namespace selnet

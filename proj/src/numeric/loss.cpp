// SPDX-License-Identifier: Apache-2.0
#include "selnet/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "selnet/errors.hpp"

namespace selnet {

namespace {
void check_lengths(std::span<const double> prob, std::span<const double> label) {
  if (prob.size() != label.size()) {
    throw ShapeError("bce: " + std::to_string(prob.size()) + " probabilities vs " +
                     std::to_string(label.size()) + " labels");
  }
  if (prob.empty()) throw PreconditionError("bce: empty batch");
}
}  // namespace

double bce_loss(std::span<const double> prob, std::span<const double> label) {
  check_lengths(prob, label);
  double total = 0.0;
  for (std::size_t i = 0; i < prob.size(); ++i) {
    const double p = std::clamp(prob[i], kProbabilityClamp, 1.0 - kProbabilityClamp);
    const double y = label[i];
    total -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
  }
  return total / static_cast<double>(prob.size());
}

std::vector<double> bce_logit_gradient(std::span<const double> prob, std::span<const double> label) {
  check_lengths(prob, label);
  // The clamp only affects |p - y| < 1e-12 in value, so it is ignored here;
  // keeping the (p - y) form lets saturated wrong predictions still recover.
  std::vector<double> grad(prob.size());
  const double inv_n = 1.0 / static_cast<double>(prob.size());
  for (std::size_t i = 0; i < prob.size(); ++i) grad[i] = (prob[i] - label[i]) * inv_n;
  return grad;
}

}  // namespace selnet

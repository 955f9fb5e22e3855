// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

namespace selnet {

inline constexpr double kProbabilityClamp = 1e-12;

/// Mean binary cross-entropy; probabilities are clamped to
/// [1e-12, 1 - 1e-12] before the logarithm.
double bce_loss(std::span<const double> prob, std::span<const double> label);

/// Gradient of the mean BCE with respect to the pre-sigmoid logits:
/// (p - y) / n.
std::vector<double> bce_logit_gradient(std::span<const double> prob, std::span<const double> label);

}  // namespace selnet

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

#include "selnet/gradcheck.hpp"
#include "selnet/selectornet.hpp"

namespace selnet {

/// Gradient check of the full model under mean BCE on one batch.
///
/// Analytic gradients come from forward + backward; numeric ones from
/// central differences of the same loss. With `training` set, batch norms use
/// batch statistics in both evaluations and running statistics are never
/// committed, so the model is left unchanged apart from its grad buffers.
GradCheckReport finite_diff_check(SelectorNet& model, const Matrix& x, const Matrix& embed,
                                  std::span<const double> labels, double step_size, bool training = true);

}  // namespace selnet

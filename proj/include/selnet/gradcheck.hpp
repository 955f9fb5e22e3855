// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include "selnet/layers.hpp"

namespace selnet {

inline constexpr double kMinFiniteDiffStep = 1e-7;
inline constexpr double kMaxFiniteDiffStep = 1e-4;

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t entries_checked = 0;
};

/// Central-difference gradient check.
///
/// Each param's `grad` must already hold the analytic gradient of `loss` at
/// the current values. Every entry is perturbed by +-step_size, `loss` is
/// re-evaluated, and the report carries the largest
/// |analytic - numeric| / max(1, |numeric|). `loss` must be a pure function of
/// the parameter values (batch norm either frozen or using batch statistics
/// without committing them).
GradCheckReport finite_diff_check(std::span<const ParamRef> params,
                                  const std::function<double()>& loss, double step_size);

}  // namespace selnet

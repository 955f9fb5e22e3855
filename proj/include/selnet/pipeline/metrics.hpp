// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace selnet::pipeline {

struct Confusion {
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t total() const noexcept { return tp + tn + fp + fn; }
};

/// Rates with a zero denominator are absent.
struct Metrics {
  Confusion confusion;
  double accuracy = 0.0;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> specificity;
};

Metrics metrics_from_confusion(const Confusion& c);

/// Positive iff prob >= threshold. PreconditionError on an empty set.
Metrics evaluate_predictions(std::span<const double> probs, std::span<const double> labels, double threshold = 0.5);

}  // namespace selnet::pipeline

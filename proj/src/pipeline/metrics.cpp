// SPDX-License-Identifier: Apache-2.0
#include "selnet/pipeline/metrics.hpp"

#include "selnet/errors.hpp"

namespace selnet::pipeline {

namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

Metrics metrics_from_confusion(const Confusion& c) {
  if (c.total() == 0) throw PreconditionError("metrics: empty evaluation set");
  Metrics m;
  m.confusion = c;
  m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  m.specificity = ratio(c.tn, c.tn + c.fp);
  return m;
}

Metrics evaluate_predictions(std::span<const double> probs, std::span<const double> labels, double threshold) {
  if (probs.size() != labels.size()) {
    throw ShapeError("evaluate: " + std::to_string(probs.size()) + " predictions for " +
                     std::to_string(labels.size()) + " labels");
  }
  Confusion c;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const bool pred = probs[i] >= threshold;
    const bool truth = labels[i] == 1.0;
    if (pred && truth) ++c.tp;
    else if (pred) ++c.fp;
    else if (truth) ++c.fn;
    else ++c.tn;
  }
  return metrics_from_confusion(c);
}

}  // namespace selnet::pipeline

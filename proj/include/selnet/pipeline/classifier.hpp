// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "selnet/layers.hpp"
#include "selnet/matrix.hpp"
#include "selnet/selectornet.hpp"

namespace selnet::pipeline {

/// What the training loop needs from a model.
class BinaryClassifier {
 public:
  virtual ~BinaryClassifier() = default;

  /// Inference-mode probabilities.
  virtual std::vector<double> predict(const Matrix& x, const Matrix& embed) const = 0;
  /// Training-mode forward and backward; gradients accumulate. Returns the mean BCE of the batch.
  virtual double accumulate_gradients(const Matrix& x, const Matrix& embed, std::span<const double> labels) = 0;
  virtual std::vector<ParamRef> parameters() = 0;
  virtual std::unique_ptr<BinaryClassifier> clone() const = 0;
  virtual std::string name() const = 0;
};

class SelectorNetClassifier final : public BinaryClassifier {
 public:
  explicit SelectorNetClassifier(const SelectorNetConfig& config) : net_(config) {}
  explicit SelectorNetClassifier(SelectorNet net) : net_(std::move(net)) {}

  std::vector<double> predict(const Matrix& x, const Matrix& embed) const override;
  double accumulate_gradients(const Matrix& x, const Matrix& embed, std::span<const double> labels) override;
  std::vector<ParamRef> parameters() override { return net_.parameters(); }
  std::unique_ptr<BinaryClassifier> clone() const override;
  std::string name() const override { return "selectornet"; }

  const SelectorNet& net() const noexcept { return net_; }

 private:
  SelectorNet net_;
};

/// sigmoid(Linear(concat(x, embed))).
class LogisticClassifier final : public BinaryClassifier {
 public:
  LogisticClassifier(std::size_t feature_dim, std::size_t embed_dim, std::uint64_t seed);

  std::vector<double> predict(const Matrix& x, const Matrix& embed) const override;
  double accumulate_gradients(const Matrix& x, const Matrix& embed, std::span<const double> labels) override;
  std::vector<ParamRef> parameters() override;
  std::unique_ptr<BinaryClassifier> clone() const override;
  std::string name() const override { return "logistic"; }

  Linear& linear() noexcept { return linear_; }

 private:
  Matrix input(const Matrix& x, const Matrix& embed) const;
  Linear linear_;
};

}  // namespace selnet::pipeline

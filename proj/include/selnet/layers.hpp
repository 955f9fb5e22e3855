// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "selnet/matrix.hpp"
#include "selnet/rng.hpp"

namespace selnet {

/// A trainable tensor and its accumulated gradient (same shape).
struct Parameter {
  Parameter() = default;
  explicit Parameter(Matrix initial) : value(std::move(initial)), grad(value.rows(), value.cols()) {}

  void zero_grad() { grad.fill(0.0); }

  Matrix value;
  Matrix grad;
};

/// Named, non-owning view of a parameter inside a model.
struct ParamRef {
  std::string name;
  Parameter* param;
};

/// Named, non-owning view of non-trainable state (batch-norm running statistics).
struct BufferRef {
  std::string name;
  Matrix* value;
};

enum class Activation { Relu, Sigmoid };

double sigmoid(double x);
Matrix relu(const Matrix& x);
Matrix sigmoid(const Matrix& x);
Matrix activation(Activation kind, const Matrix& x);

/// dy masked to entries where the pre-activation was strictly positive.
Matrix relu_backward(const Matrix& pre_activation, const Matrix& dy);
/// dy * s * (1 - s) for s = sigmoid output.
Matrix sigmoid_backward(const Matrix& output, const Matrix& dy);

/// Fully connected layer: Y = X W + b, with W stored in x out.
class Linear {
 public:
  Linear() = default;
  /// Zero-initialised layer.
  Linear(std::size_t in_features, std::size_t out_features);
  /// Uniform init in [-1/sqrt(in), 1/sqrt(in)] for both weight and bias.
  Linear(std::size_t in_features, std::size_t out_features, Rng& rng);

  std::size_t in_features() const noexcept { return weight.value.rows(); }
  std::size_t out_features() const noexcept { return weight.value.cols(); }

  Matrix forward(const Matrix& x) const;
  /// Accumulates dW, db for the forward input `x` and upstream `dy`; returns dX.
  Matrix backward(const Matrix& x, const Matrix& dy);

  void collect(const std::string& prefix, std::vector<ParamRef>& out);
  void zero();

  Parameter weight;
  Parameter bias;  // 1 x out
};

/// Per-forward record needed by BatchNorm::backward and BatchNorm::commit.
struct BatchNormTape {
  Matrix normalized;  // xhat
  std::vector<double> batch_mean;
  std::vector<double> batch_var;  // biased; empty when running statistics were used
  std::vector<double> inv_std;
  bool training = false;
  bool batch_stats = false;
  bool recorded = false;
};

/// Per-column batch normalization with affine gamma/beta.
///
/// Training mode standardizes with batch statistics, inference mode with the
/// running statistics. Running statistics only change through commit(), so a
/// const layer is side-effect free in both modes.
class BatchNorm {
 public:
  BatchNorm() = default;
  explicit BatchNorm(std::size_t features, double momentum = 0.1, double epsilon = 1e-5);

  std::size_t features() const noexcept { return gamma.value.cols(); }

  Matrix forward(const Matrix& x, bool training, BatchNormTape* tape = nullptr) const;
  /// Training-mode tapes only:
  /// running = (1 - momentum) * running + momentum * batch (unbiased variance).
  void commit(const BatchNormTape& tape);
  Matrix backward(const BatchNormTape& tape, const Matrix& dy);

  /// gamma = 1, beta = 0, running mean 0, running var 1.
  void reset_identity();

  void collect(const std::string& prefix, std::vector<ParamRef>& out);
  void collect_buffers(const std::string& prefix, std::vector<BufferRef>& out);

  Parameter gamma;  // 1 x features
  Parameter beta;   // 1 x features
  Matrix running_mean;
  Matrix running_var;
  double momentum = 0.1;
  double epsilon = 1e-5;
  /// Normalize with the statistics of the presented batch in inference mode too.
  /// Running statistics are still tracked. A single row normalizes to zero.
  bool batch_stats_at_inference = false;
};

}  // namespace selnet

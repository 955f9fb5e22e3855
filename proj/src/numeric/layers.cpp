// SPDX-License-Identifier: Apache-2.0
#include "selnet/layers.hpp"

#include <cmath>

#include "selnet/errors.hpp"

namespace selnet {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Matrix relu(const Matrix& x) {
  Matrix out = x;
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return out;
}

Matrix sigmoid(const Matrix& x) {
  Matrix out = x;
  for (double& v : out.values()) v = sigmoid(v);
  return out;
}

Matrix activation(Activation kind, const Matrix& x) {
  return kind == Activation::Relu ? relu(x) : sigmoid(x);
}

Matrix relu_backward(const Matrix& pre_activation, const Matrix& dy) {
  require_same_shape(pre_activation, dy, "pre-activation", "upstream gradient");
  Matrix dx = dy;
  auto pre = pre_activation.values();
  auto d = dx.values();
  for (std::size_t i = 0; i < d.size(); ++i)
    if (!(pre[i] > 0.0)) d[i] = 0.0;
  return dx;
}

Matrix sigmoid_backward(const Matrix& output, const Matrix& dy) {
  require_same_shape(output, dy, "sigmoid output", "upstream gradient");
  Matrix dx = dy;
  auto s = output.values();
  auto d = dx.values();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] *= s[i] * (1.0 - s[i]);
  return dx;
}

Linear::Linear(std::size_t in_features, std::size_t out_features)
    : weight(Matrix(in_features, out_features)), bias(Matrix(1, out_features)) {}

Linear::Linear(std::size_t in_features, std::size_t out_features, Rng& rng)
    : Linear(in_features, out_features) {
  const double bound = in_features == 0 ? 0.0 : 1.0 / std::sqrt(static_cast<double>(in_features));
  for (double& w : weight.value.values()) w = rng.uniform(-bound, bound);
  for (double& b : bias.value.values()) b = rng.uniform(-bound, bound);
}

Matrix Linear::forward(const Matrix& x) const {
  if (x.cols() != in_features()) {
    throw ShapeError("linear: input " + x.shape_string() + " incompatible with weight " +
                     weight.value.shape_string());
  }
  Matrix y = matmul(x, weight.value);
  const auto b = bias.value.row(0);
  for (std::size_t r = 0; r < y.rows(); ++r) {
    auto row = y.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += b[c];
  }
  return y;
}

Matrix Linear::backward(const Matrix& x, const Matrix& dy) {
  if (x.cols() != in_features() || dy.cols() != out_features() || x.rows() != dy.rows()) {
    throw ShapeError("linear backward: input " + x.shape_string() + " and upstream gradient " +
                     dy.shape_string() + " incompatible with weight " + weight.value.shape_string());
  }
  weight.grad += matmul_tn(x, dy);
  bias.grad += column_sums(dy);
  return matmul_nt(dy, weight.value);
}

void Linear::collect(const std::string& prefix, std::vector<ParamRef>& out) {
  out.push_back({prefix + ".weight", &weight});
  out.push_back({prefix + ".bias", &bias});
}

void Linear::zero() {
  weight.value.fill(0.0);
  bias.value.fill(0.0);
}

BatchNorm::BatchNorm(std::size_t features, double momentum_, double epsilon_)
    : gamma(Matrix(1, features, 1.0)),
      beta(Matrix(1, features, 0.0)),
      running_mean(1, features, 0.0),
      running_var(1, features, 1.0),
      momentum(momentum_),
      epsilon(epsilon_) {}

Matrix BatchNorm::forward(const Matrix& x, bool training, BatchNormTape* tape) const {
  const std::size_t f = features();
  if (x.cols() != f) {
    throw ShapeError("batchnorm: input " + x.shape_string() + " incompatible with " +
                     std::to_string(f) + " features");
  }
  const std::size_t n = x.rows();
  if (training && n < 2) {
    throw PreconditionError("batchnorm: training mode needs at least 2 rows, got " +
                            std::to_string(n) + " (batch variance undefined)");
  }
  BatchNormTape scratch;
  BatchNormTape& t = tape != nullptr ? *tape : scratch;
  const bool use_batch = training || batch_stats_at_inference;
  if (use_batch && n == 0) throw PreconditionError("batchnorm: empty batch");
  t.training = training;
  t.batch_stats = use_batch;
  t.normalized = Matrix(n, f);
  t.inv_std.assign(f, 0.0);
  t.batch_mean.clear();
  t.batch_var.clear();
  if (use_batch) {
    t.batch_mean.assign(f, 0.0);
    t.batch_var.assign(f, 0.0);
  }

  Matrix y(n, f);
  const auto g = gamma.value.row(0);
  const auto b = beta.value.row(0);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t c = 0; c < f; ++c) {
    double mean = running_mean(0, c);
    double var = running_var(0, c);
    if (use_batch) {
      mean = 0.0;
      for (std::size_t r = 0; r < n; ++r) mean += x(r, c);
      mean *= inv_n;
      var = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        const double d = x(r, c) - mean;
        var += d * d;
      }
      var *= inv_n;
      t.batch_mean[c] = mean;
      t.batch_var[c] = var;
    }
    const double inv = 1.0 / std::sqrt(var + epsilon);
    t.inv_std[c] = inv;
    for (std::size_t r = 0; r < n; ++r) {
      const double xhat = (x(r, c) - mean) * inv;
      t.normalized(r, c) = xhat;
      y(r, c) = g[c] * xhat + b[c];
    }
  }
  t.recorded = true;
  return y;
}

void BatchNorm::commit(const BatchNormTape& tape) {
  if (!tape.recorded || !tape.training) {
    throw StateError("batchnorm: commit without a recorded training forward");
  }
  const double n = static_cast<double>(tape.normalized.rows());
  auto rm = running_mean.row(0);
  auto rv = running_var.row(0);
  for (std::size_t c = 0; c < features(); ++c) {
    const double unbiased = tape.batch_var[c] * n / (n - 1.0);
    rm[c] = (1.0 - momentum) * rm[c] + momentum * tape.batch_mean[c];
    rv[c] = (1.0 - momentum) * rv[c] + momentum * unbiased;
  }
}

Matrix BatchNorm::backward(const BatchNormTape& tape, const Matrix& dy) {
  if (!tape.recorded) throw StateError("batchnorm: backward without a recorded forward");
  require_same_shape(tape.normalized, dy, "batchnorm input", "upstream gradient");
  const std::size_t n = dy.rows(), f = dy.cols();
  const auto g = gamma.value.row(0);
  auto dg = gamma.grad.row(0);
  auto db = beta.grad.row(0);
  Matrix dx(n, f);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t c = 0; c < f; ++c) {
    double sum_dy = 0.0, sum_dy_xhat = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      sum_dy += dy(r, c);
      sum_dy_xhat += dy(r, c) * tape.normalized(r, c);
    }
    db[c] += sum_dy;
    dg[c] += sum_dy_xhat;
    const double scale = g[c] * tape.inv_std[c];
    if (!tape.batch_stats) {
      for (std::size_t r = 0; r < n; ++r) dx(r, c) = scale * dy(r, c);
      continue;
    }
    // dxhat = gamma * dy; the sums above factor gamma out.
    for (std::size_t r = 0; r < n; ++r) {
      dx(r, c) = scale * (dy(r, c) - inv_n * sum_dy - tape.normalized(r, c) * inv_n * sum_dy_xhat);
    }
  }
  return dx;
}

void BatchNorm::reset_identity() {
  gamma.value.fill(1.0);
  beta.value.fill(0.0);
  running_mean.fill(0.0);
  running_var.fill(1.0);
}

void BatchNorm::collect(const std::string& prefix, std::vector<ParamRef>& out) {
  out.push_back({prefix + ".gamma", &gamma});
  out.push_back({prefix + ".beta", &beta});
}

void BatchNorm::collect_buffers(const std::string& prefix, std::vector<BufferRef>& out) {
  out.push_back({prefix + ".running_mean", &running_mean});
  out.push_back({prefix + ".running_var", &running_var});
}

}  // namespace selnet

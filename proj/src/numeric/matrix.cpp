// SPDX-License-Identifier: Apache-2.0
#include "selnet/matrix.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "selnet/errors.hpp"

namespace selnet {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    std::ostringstream msg;
    msg << "matrix data length " << data_.size() << " does not match " << rows_ << "x" << cols_;
    throw ShapeError(msg.str());
  }
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("ragged initializer rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(data));
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void Matrix::fill(double v) {
  for (double& x : data_) x = v;
}

bool Matrix::all_finite() const noexcept {
  for (double x : data_)
    if (!std::isfinite(x)) return false;
  return true;
}

std::string Matrix::shape_string() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* what_a, const char* what_b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string("shape mismatch: ") + what_a + " is " + a.shape_string() + ", " +
                     what_b + " is " + b.shape_string());
  }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: left operand " + a.shape_string() + " incompatible with right operand " +
                     b.shape_string());
  }
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  Matrix out(n, m);
  const double* pa = a.values().data();
  const double* pb = b.values().data();
  double* po = out.values().data();
  for (std::size_t i = 0; i < n; ++i) {
    double* orow = po + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = pa[i * k + p];
      const double* brow = pb + p * m;
      for (std::size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw ShapeError("matmul_tn: left operand " + a.shape_string() +
                     " (transposed) incompatible with right operand " + b.shape_string());
  }
  const std::size_t n = a.cols(), k = a.rows(), m = b.cols();
  Matrix out(n, m);
  const double* pa = a.values().data();
  const double* pb = b.values().data();
  double* po = out.values().data();
  for (std::size_t p = 0; p < k; ++p) {
    const double* arow = pa + p * n;
    const double* brow = pb + p * m;
    for (std::size_t i = 0; i < n; ++i) {
      const double av = arow[i];
      double* orow = po + i * m;
      for (std::size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw ShapeError("matmul_nt: left operand " + a.shape_string() +
                     " incompatible with right operand " + b.shape_string() + " (transposed)");
  }
  const std::size_t n = a.rows(), k = a.cols(), m = b.rows();
  Matrix out(n, m);
  const double* pa = a.values().data();
  const double* pb = b.values().data();
  double* po = out.values().data();
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = pa + i * k;
    for (std::size_t j = 0; j < m; ++j) {
      const double* brow = pb + j * k;
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      po[i * m + j] = acc;
    }
  }
  return out;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  Matrix out = a;
  out += b;
  return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "lhs", "rhs");
  Matrix out = a;
  auto o = out.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bv[i];
  return out;
}

Matrix& operator+=(Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "lhs", "rhs");
  auto o = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bv[i];
  return a;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "lhs", "rhs");
  Matrix out = a;
  auto o = out.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= bv[i];
  return out;
}

Matrix scaled(const Matrix& a, double s) {
  Matrix out = a;
  for (double& v : out.values()) v *= s;
  return out;
}

Matrix concat_cols(const Matrix& left, const Matrix& right) {
  if (left.rows() != right.rows()) {
    throw ShapeError("concat_cols: left " + left.shape_string() + " and right " +
                     right.shape_string() + " differ in rows");
  }
  Matrix out(left.rows(), left.cols() + right.cols());
  for (std::size_t r = 0; r < left.rows(); ++r) {
    auto o = out.row(r);
    auto l = left.row(r);
    auto rr = right.row(r);
    std::copy(l.begin(), l.end(), o.begin());
    std::copy(rr.begin(), rr.end(), o.begin() + static_cast<std::ptrdiff_t>(l.size()));
  }
  return out;
}

std::pair<Matrix, Matrix> split_cols(const Matrix& m, std::size_t left_cols) {
  if (left_cols > m.cols()) {
    throw ShapeError("split_cols: cannot take " + std::to_string(left_cols) + " columns from " +
                     m.shape_string());
  }
  Matrix left(m.rows(), left_cols), right(m.rows(), m.cols() - left_cols);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto src = m.row(r);
    std::copy(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(left_cols), left.row(r).begin());
    std::copy(src.begin() + static_cast<std::ptrdiff_t>(left_cols), src.end(), right.row(r).begin());
  }
  return {std::move(left), std::move(right)};
}

Matrix take_rows(const Matrix& m, std::span<const std::size_t> indices) {
  Matrix out(indices.size(), m.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= m.rows()) {
      throw ShapeError("take_rows: index " + std::to_string(indices[i]) + " out of range for " +
                       m.shape_string());
    }
    auto src = m.row(indices[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

Matrix column_sums(const Matrix& m) {
  Matrix out(1, m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto src = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) out(0, c) += src[c];
  }
  return out;
}

}  // namespace selnet

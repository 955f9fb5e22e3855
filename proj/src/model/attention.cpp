// SPDX-License-Identifier: Apache-2.0
#include "selnet/attention.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "selnet/errors.hpp"

namespace selnet {

AttentionReport attention(std::span<const StepTrace> traces, std::vector<std::string> feature_names) {
  if (traces.empty()) throw PreconditionError("attention: no step traces");
  const std::size_t b = traces.front().x_dec.rows();
  const std::size_t f = traces.front().x_dec.cols();
  if (!feature_names.empty() && feature_names.size() != f) {
    throw ShapeError("attention: " + std::to_string(feature_names.size()) + " feature names for " +
                     std::to_string(f) + " features");
  }

  AttentionReport report;
  report.overall = Matrix(b, f);
  report.feature_names = std::move(feature_names);
  for (const StepTrace& t : traces) {
    if (t.x_dec.rows() != b || t.x_dec.cols() != f) {
      throw ShapeError("attention: step x_dec " + t.x_dec.shape_string() + " inconsistent with " +
                       std::to_string(b) + "x" + std::to_string(f));
    }
    require_same_shape(t.s1, t.x_dec, "S1", "x_dec");
    require_same_shape(t.s2, t.x_dec, "S2", "x_dec");
    Matrix step(b, f);
    for (std::size_t r = 0; r < b; ++r) {
      double contribution = 0.0;
      for (double v : t.x_dec.row(r)) contribution += v;
      for (std::size_t c = 0; c < f; ++c) step(r, c) = (t.s1(r, c) + t.s2(r, c)) * contribution;
    }
    report.overall += step;
    report.per_step.push_back(std::move(step));
  }
  return report;
}

std::vector<double> mean_abs_attention(const AttentionReport& report) {
  const Matrix& a = report.overall;
  std::vector<double> out(a.cols(), 0.0);
  if (a.rows() == 0) return out;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) out[c] += std::abs(a(r, c));
  for (double& v : out) v /= static_cast<double>(a.rows());
  return out;
}

void write_attention_csv(const AttentionReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write attention CSV to " + path.string());
  const Matrix& a = report.overall;
  for (std::size_t c = 0; c < a.cols(); ++c) {
    if (c) out << ',';
    out << (report.feature_names.empty() ? "f" + std::to_string(c) : report.feature_names[c]);
  }
  out << '\n';
  char buf[32];
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) {
      if (c) out << ',';
      std::snprintf(buf, sizeof buf, "%.17g", a(r, c));
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw DataError("failed writing attention CSV " + path.string());
}

}  // namespace selnet

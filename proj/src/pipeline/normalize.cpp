// SPDX-License-Identifier: Apache-2.0
#include "selnet/pipeline/normalize.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "selnet/errors.hpp"
#include "selnet/pipeline/csv.hpp"

namespace selnet::pipeline {

std::string_view to_string(NormPolicy p) { return p == NormPolicy::Global ? "global" : "train_fold"; }

NormPolicy parse_norm_policy(std::string_view s) {
  if (s == "global") return NormPolicy::Global;
  if (s == "train_fold") return NormPolicy::TrainFold;
  throw PreconditionError("unknown normalization policy '" + std::string(s) + "' (global|train_fold)");
}

NormStats fit_norm(const Matrix& x, std::span<const std::size_t> rows, NormPolicy policy) {
  if (rows.empty()) throw PreconditionError("normalize: empty fit set");
  NormStats s;
  s.policy = policy;
  s.k_min.assign(x.cols(), 0.0);
  s.k_max.assign(x.cols(), 0.0);
  for (std::size_t c = 0; c < x.cols(); ++c) {
    double lo = x(rows[0], c), hi = lo;
    for (std::size_t r : rows) {
      lo = std::min(lo, x(r, c));
      hi = std::max(hi, x(r, c));
    }
    s.k_min[c] = lo;
    s.k_max[c] = hi;
  }
  return s;
}

Matrix apply_norm(const NormStats& stats, const Matrix& x) {
  if (stats.k_min.size() != x.cols() || stats.k_max.size() != x.cols()) {
    throw ShapeError("normalize: statistics for " + std::to_string(stats.k_min.size()) + " features applied to " +
                     x.shape_string());
  }
  Matrix out(x.rows(), x.cols());
  for (std::size_t c = 0; c < x.cols(); ++c) {
    const double lo = stats.k_min[c], span = stats.k_max[c] - stats.k_min[c];
    for (std::size_t r = 0; r < x.rows(); ++r) {
      out(r, c) = span > 0.0 ? std::clamp((x(r, c) - lo) / span, 0.0, 1.0) : 0.0;
    }
  }
  return out;
}

std::pair<Dataset, NormStats> normalize(const Dataset& data, NormPolicy policy, std::span<const std::size_t> fit_rows) {
  NormStats stats;
  if (policy == NormPolicy::Global) {
    std::vector<std::size_t> all(data.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    stats = fit_norm(data.features, all, policy);
  } else {
    stats = fit_norm(data.features, fit_rows, policy);
  }
  Dataset out = data;
  out.features = apply_norm(stats, data.features);
  return {std::move(out), std::move(stats)};
}

void write_norm_stats(const NormStats& stats, const FeatureSchema& schema, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "#policy=" << to_string(stats.policy) << '\n';
  write_csv_row(out, {"feature", "k_min", "k_max"});
  for (std::size_t i = 0; i < schema.size(); ++i) {
    write_csv_row(out, {schema.name(i), format_double(stats.k_min.at(i)), format_double(stats.k_max.at(i))});
  }
}

NormStats read_norm_stats(const std::filesystem::path& path, const FeatureSchema& schema) {
  const CsvTable t = read_csv(path);
  NormStats s;
  for (const auto& c : t.comments) {
    if (c.rfind("policy=", 0) == 0) s.policy = parse_norm_policy(c.substr(7));
  }
  const std::size_t name_col = t.column("feature"), lo_col = t.column("k_min"), hi_col = t.column("k_max");
  if (t.rows.size() != schema.size()) {
    throw DataError(path.string() + ": " + std::to_string(t.rows.size()) + " features, data has " +
                    std::to_string(schema.size()));
  }
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (t.rows[i][name_col] != schema.name(i)) {
      throw DataError(path.string() + ": row " + std::to_string(i + 1) + " is feature '" + t.rows[i][name_col] +
                      "', data has '" + schema.name(i) + "'");
    }
    s.k_min.push_back(parse_double(t.rows[i][lo_col], path.string(), i + 1, "k_min"));
    s.k_max.push_back(parse_double(t.rows[i][hi_col], path.string(), i + 1, "k_max"));
  }
  return s;
}

}  // namespace selnet::pipeline

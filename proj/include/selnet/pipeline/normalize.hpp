// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "selnet/matrix.hpp"
#include "selnet/pipeline/dataset.hpp"

namespace selnet::pipeline {

enum class NormPolicy { Global, TrainFold };

std::string_view to_string(NormPolicy p);
NormPolicy parse_norm_policy(std::string_view s);

struct NormStats {
  std::vector<double> k_min;
  std::vector<double> k_max;
  NormPolicy policy = NormPolicy::TrainFold;
};

/// Column min and max over the given rows. PreconditionError on an empty set.
NormStats fit_norm(const Matrix& x, std::span<const std::size_t> rows, NormPolicy policy);
/// (k - min) / (max - min), clamped to [0, 1]; constant columns map to 0.
Matrix apply_norm(const NormStats& stats, const Matrix& x);

/// Fits on `fit_rows` (train_fold) or on every row (global) and normalizes all rows.
std::pair<Dataset, NormStats> normalize(const Dataset& data, NormPolicy policy, std::span<const std::size_t> fit_rows);

void write_norm_stats(const NormStats& stats, const FeatureSchema& schema, const std::filesystem::path& path);
NormStats read_norm_stats(const std::filesystem::path& path, const FeatureSchema& schema);

}  // namespace selnet::pipeline

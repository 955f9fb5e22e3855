// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "selnet/matrix.hpp"
#include "selnet/tongue/schema.hpp"

namespace selnet::pipeline {

using tongue::FeatureSchema;

struct Dataset {
  FeatureSchema schema;
  Matrix features;              // n x F
  std::vector<double> labels;   // 0 or 1 (1 = NAFLD)
  Matrix embeddings;            // n x E, E may be 0
  std::vector<std::string> ids; // empty when the file has no id column
  std::vector<std::string> comments;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t embed_dim() const noexcept { return embeddings.cols(); }
  void validate() const;
  Dataset subset(std::span<const std::size_t> rows) const;
};

/// Columns: optional "id", the schema features, "label", optional "emb_0".."emb_{E-1}".
/// Without a schema every other column is a feature, in file order.
/// Errors name the row (1-based data row) and column.
Dataset load_dataset(const std::filesystem::path& path, const std::optional<FeatureSchema>& schema = std::nullopt);
Dataset parse_dataset(std::string_view text, const std::string& source,
                      const std::optional<FeatureSchema>& schema = std::nullopt);

void write_dataset(const Dataset& data, const std::filesystem::path& path);
std::string dataset_to_csv(const Dataset& data);

double majority_rate(std::span<const double> labels);

}  // namespace selnet::pipeline

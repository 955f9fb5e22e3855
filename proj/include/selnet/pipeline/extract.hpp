// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>

#include "selnet/tongue/features.hpp"

namespace selnet::pipeline {

struct ExtractPaths {
  std::filesystem::path image_dir;
  std::filesystem::path mask_dir;
  std::filesystem::path physio_csv;
  std::optional<std::filesystem::path> detections_csv;
  std::filesystem::path out;
  std::size_t embed_dim = 10;
};

struct ExtractSummary {
  std::size_t rows = 0;
  std::size_t flagged_rows = 0;
};

/// One feature row per physio record: image <id>.png|.jpg|.jpeg, mask <id>.png.
/// A "label" column in the physio CSV is carried through. Fallback flags go to <out>.flags.csv.
ExtractSummary run_extract(const ExtractPaths& paths, const tongue::ExtractionConfig& config = {});

}  // namespace selnet::pipeline

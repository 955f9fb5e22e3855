// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace selnet::tongue {

/// Ordered, unique feature names.
class FeatureSchema {
 public:
  FeatureSchema() = default;
  explicit FeatureSchema(std::vector<std::string> names);

  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  std::optional<std::size_t> index_of(std::string_view name) const;

  friend bool operator==(const FeatureSchema&, const FeatureSchema&) = default;

 private:
  std::vector<std::string> names_;
};

inline constexpr std::string_view kTongueSchemaVersion = "tongue-v1";

/// The 52-feature tongue schema in canonical order.
const FeatureSchema& tongue_schema();

const std::vector<std::string>& physiological_names();
const std::vector<std::string>& detection_classes();

}  // namespace selnet::tongue

// SPDX-License-Identifier: Apache-2.0
#include "selnet/tongue/schema.hpp"

#include <algorithm>
#include <set>

#include "selnet/errors.hpp"

namespace selnet::tongue {

FeatureSchema::FeatureSchema(std::vector<std::string> names) : names_(std::move(names)) {
  std::set<std::string_view> seen;
  for (const auto& n : names_) {
    if (n.empty()) throw DataError("schema: empty feature name");
    if (!seen.insert(n).second) throw DataError("schema: duplicate feature name '" + n + "'");
  }
}

std::optional<std::size_t> FeatureSchema::index_of(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

const std::vector<std::string>& physiological_names() {
  static const std::vector<std::string> names{
      "Gender", "Age", "Height", "Weight", "Waist Circumference", "Hip Circumference", "WHR", "WHtR", "BMI"};
  return names;
}

const std::vector<std::string>& detection_classes() {
  static const std::vector<std::string> names{"crack", "peeled_coat", "spot", "tooth_mark"};
  return names;
}

namespace {

std::vector<std::string> build_tongue_names() {
  std::vector<std::string> names = physiological_names();
  const char* channels[] = {"R", "G", "B", "H", "S", "I", "Y", "Cr", "Cb", "L", "a", "b"};
  for (const char* region : {"body", "coat"}) {
    for (const char* c : channels) names.push_back(std::string(region) + "_" + c);
  }
  names.push_back("coat_ratio");
  for (const char* region : {"body", "coat"}) {
    for (const char* t : {"CON", "ASM", "ENT", "MEAN"}) names.push_back(std::string(region) + "_" + t);
  }
  names.push_back("area_ratio");
  names.push_back("aspect_ratio");
  for (const auto& cls : detection_classes()) {
    names.push_back(cls + "_count");
    names.push_back(cls + "_area");
  }
  return names;
}

}  // namespace

const FeatureSchema& tongue_schema() {
  static const FeatureSchema schema(build_tongue_names());
  return schema;
}

}  // namespace selnet::tongue

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "selnet/tongue/color.hpp"
#include "selnet/tongue/glcm.hpp"
#include "selnet/tongue/image.hpp"
#include "selnet/tongue/schema.hpp"

namespace selnet::tongue {

/// Raw indicators are required. Derived ratios are computed when absent.
struct PhysioRecord {
  std::optional<double> gender;  // male 1, female 0
  std::optional<double> age;
  std::optional<double> height_cm;
  std::optional<double> weight_kg;
  std::optional<double> waist;
  std::optional<double> hip;
  std::optional<double> whr;
  std::optional<double> whtr;
  std::optional<double> bmi;
};

/// Gender cell to code: M/male/1 -> 1, F/female/0 -> 0 (case-insensitive).
double encode_gender(const std::string& cell);

/// Gender, Age, Height, Weight, Waist, Hip, WHR, WHtR, BMI. DataError names a missing raw indicator.
std::array<double, 9> physio_features(const PhysioRecord& r);

struct DetectionBox {
  std::string cls;
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;
};

struct DetectionInput {
  std::array<double, 4> count{};
  std::array<double, 4> area_ratio{};
};

/// A pixel is covered when its center lies inside a box. Area is the union of
/// covered pixels within the tongue over the tongue area. Unknown classes raise DataError.
DetectionInput summarize_detections(const std::vector<DetectionBox>& boxes, const Mask& tongue);

struct Morphology {
  double area_ratio = 0.0;
  double aspect_ratio = 0.0;
};

enum class AspectDefinition { HeightOverWidth, WidthOverHeight };

Morphology morphology(const Mask& mask, AspectDefinition aspect = AspectDefinition::HeightOverWidth);

struct ExtractionConfig {
  GlcmConfig glcm;
  AspectDefinition aspect = AspectDefinition::HeightOverWidth;
  int coat_threshold = kCoatThreshold;
};

struct FeatureVector {
  std::vector<double> values;
  /// Names of fallbacks taken: coat_empty, body_empty, coat_texture_empty, body_texture_empty.
  std::vector<std::string> flags;
};

FeatureVector extract_features(const TongueObservation& obs, const PhysioRecord& physio,
                               const DetectionInput& detections, const FeatureSchema& schema = tongue_schema(),
                               const ExtractionConfig& config = {});

}  // namespace selnet::tongue

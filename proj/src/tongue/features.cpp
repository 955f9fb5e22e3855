// SPDX-License-Identifier: Apache-2.0
#include "selnet/tongue/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "selnet/errors.hpp"

namespace selnet::tongue {

double encode_gender(const std::string& cell) {
  std::string v;
  for (char c : cell) {
    if (!std::isspace(static_cast<unsigned char>(c))) v.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (v == "m" || v == "male" || v == "1") return 1.0;
  if (v == "f" || v == "female" || v == "0") return 0.0;
  throw DataError("unrecognized gender value '" + cell + "' (expected M/F)");
}

namespace {

double require(const std::optional<double>& v, const char* name) {
  if (!v) throw DataError(std::string("physiological record: missing ") + name);
  if (!std::isfinite(*v)) throw DataError(std::string("physiological record: non-finite ") + name);
  return *v;
}

double positive(double v, const char* name) {
  if (v <= 0.0) throw DataError(std::string("physiological record: ") + name + " must be positive");
  return v;
}

}  // namespace

std::array<double, 9> physio_features(const PhysioRecord& r) {
  const double gender = require(r.gender, "Gender");
  const double age = require(r.age, "Age");
  const double height = positive(require(r.height_cm, "Height"), "Height");
  const double weight = require(r.weight_kg, "Weight");
  const double waist = require(r.waist, "Waist Circumference");
  const double hip = positive(require(r.hip, "Hip Circumference"), "Hip Circumference");
  const double metres = height / 100.0;
  const double whr = r.whr ? *r.whr : waist / hip;
  const double whtr = r.whtr ? *r.whtr : waist / height;
  const double bmi = r.bmi ? *r.bmi : weight / (metres * metres);
  return {gender, age, height, weight, waist, hip, whr, whtr, bmi};
}

DetectionInput summarize_detections(const std::vector<DetectionBox>& boxes, const Mask& tongue) {
  const auto& classes = detection_classes();
  const std::size_t total = tongue.count();
  if (total == 0) throw DataError("detections: empty tongue mask");
  DetectionInput out;
  std::vector<Mask> covered(classes.size(), Mask(tongue.width(), tongue.height()));
  for (const DetectionBox& b : boxes) {
    const auto it = std::find(classes.begin(), classes.end(), b.cls);
    if (it == classes.end()) throw DataError("detections: unknown class '" + b.cls + "'");
    if (!(b.x_min <= b.x_max && b.y_min <= b.y_max)) {
      throw DataError("detections: box for class '" + b.cls + "' has min > max");
    }
    const std::size_t k = static_cast<std::size_t>(it - classes.begin());
    out.count[k] += 1.0;
    for (std::size_t y = 0; y < tongue.height(); ++y) {
      const double cy = static_cast<double>(y) + 0.5;
      if (cy < b.y_min || cy > b.y_max) continue;
      for (std::size_t x = 0; x < tongue.width(); ++x) {
        const double cx = static_cast<double>(x) + 0.5;
        if (cx >= b.x_min && cx <= b.x_max && tongue.at(x, y)) covered[k].set(x, y, true);
      }
    }
  }
  for (std::size_t k = 0; k < classes.size(); ++k) {
    out.area_ratio[k] = static_cast<double>(covered[k].count()) / static_cast<double>(total);
  }
  return out;
}

Morphology morphology(const Mask& mask, AspectDefinition aspect) {
  std::size_t x0 = std::numeric_limits<std::size_t>::max(), y0 = x0, x1 = 0, y1 = 0, n = 0;
  for (std::size_t y = 0; y < mask.height(); ++y) {
    for (std::size_t x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      ++n;
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (n == 0) throw DataError("morphology: empty mask");
  const double width = static_cast<double>(x1 - x0 + 1);
  const double height = static_cast<double>(y1 - y0 + 1);
  Morphology m;
  m.area_ratio = static_cast<double>(n) / static_cast<double>(mask.width() * mask.height());
  m.aspect_ratio = aspect == AspectDefinition::HeightOverWidth ? height / width : width / height;
  return m;
}

FeatureVector extract_features(const TongueObservation& obs, const PhysioRecord& physio,
                               const DetectionInput& detections, const FeatureSchema& schema,
                               const ExtractionConfig& config) {
  if (!(schema == tongue_schema())) {
    throw DataError("extract_features: schema with " + std::to_string(schema.size()) +
                    " features does not match the " + std::string(kTongueSchemaVersion) + " layout (" +
                    std::to_string(tongue_schema().size()) + " features)");
  }
  obs.validate();
  FeatureVector out;
  out.values.reserve(schema.size());
  for (double v : physio_features(physio)) out.values.push_back(v);

  const CoatBody parts = split_coat_body(obs, config.coat_threshold);
  const RegionStats body = region_color_stats(obs.image, parts.body);
  const RegionStats coat = region_color_stats(obs.image, parts.coat);
  if (body.empty) out.flags.push_back("body_empty");
  if (coat.empty) out.flags.push_back("coat_empty");
  for (double v : body.flatten()) out.values.push_back(v);
  for (double v : coat.flatten()) out.values.push_back(v);
  out.values.push_back(coat_ratio(parts.coat, obs.mask));

  const auto texture = [&](const Mask& region, const char* flag) {
    try {
      return glcm_texture(obs.image, region, config.glcm);
    } catch (const DataError&) {
      out.flags.push_back(flag);
      return TextureStats{};
    }
  };
  for (const auto& [region, flag] : {std::pair{&parts.body, "body_texture_empty"},
                                     std::pair{&parts.coat, "coat_texture_empty"}}) {
    const TextureStats t = texture(*region, flag);
    out.values.insert(out.values.end(), {t.con, t.asm_, t.ent, t.mean});
  }

  const Morphology m = morphology(obs.mask, config.aspect);
  out.values.push_back(m.area_ratio);
  out.values.push_back(m.aspect_ratio);
  for (std::size_t k = 0; k < 4; ++k) {
    out.values.push_back(detections.count[k]);
    out.values.push_back(detections.area_ratio[k]);
  }
  return out;
}

}  // namespace selnet::tongue

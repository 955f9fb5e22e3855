// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>

#include "selnet/errors.hpp"
#include "selnet/rng.hpp"
#include "selnet/tongue/color.hpp"
#include "selnet/tongue/features.hpp"
#include "selnet/tongue/glcm.hpp"
#include "selnet/tongue/image.hpp"
#include "selnet/tongue/schema.hpp"

using namespace selnet;
using namespace selnet::tongue;

namespace {

RgbImage random_image(std::size_t w, std::size_t h, std::uint64_t seed) {
  Rng rng(seed);
  RgbImage img(w, h);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      img.set(x, y, {static_cast<std::uint8_t>(rng.below(256)), static_cast<std::uint8_t>(rng.below(256)),
                     static_cast<std::uint8_t>(rng.below(256))});
  return img;
}

Mask ellipse_mask(std::size_t w, std::size_t h) {
  Mask m(w, h);
  const double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0, rx = w * 0.4, ry = h * 0.45;
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const double dx = (x - cx) / rx, dy = (y - cy) / ry;
      m.set(x, y, dx * dx + dy * dy <= 1.0);
    }
  return m;
}

// Tongue-like fixture: reddish body with a pale band of coat pixels in the middle.
TongueObservation fixture_observation() {
  const std::size_t w = 40, h = 30;
  Rng rng(2024);
  RgbImage img(w, h);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const bool band = y >= 10 && y < 18 && x >= 12 && x < 28;
      const int r = band ? 150 + static_cast<int>(rng.below(30)) : 180 + static_cast<int>(rng.below(60));
      const int g = band ? 110 + static_cast<int>(rng.below(30)) : 60 + static_cast<int>(rng.below(40));
      const int b = band ? 100 + static_cast<int>(rng.below(30)) : 60 + static_cast<int>(rng.below(40));
      img.set(x, y, {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)});
    }
  return {img, ellipse_mask(w, h)};
}

PhysioRecord sample_physio() {
  PhysioRecord r;
  r.gender = 1;
  r.age = 45;
  r.height_cm = 170;
  r.weight_kg = 68;
  r.waist = 80;
  r.hip = 100;
  return r;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("selnet_tongue_" + name);
}

// Independent GLCM: enumerate every ordered pair of region pixels and keep those
// whose displacement is one of the offsets or its negation.
Matrix brute_force_glcm(const RgbImage& img, const Mask& region, const GlcmConfig& cfg) {
  std::vector<std::pair<long, long>> pts;
  for (std::size_t y = 0; y < img.height(); ++y)
    for (std::size_t x = 0; x < img.width(); ++x)
      if (region.at(x, y)) pts.emplace_back(static_cast<long>(x), static_cast<long>(y));
  auto level = [&](long x, long y) {
    const Rgb p = img.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
    const std::size_t weighted = 299u * p[0] + 587u * p[1] + 114u * p[2];
    return std::min<std::size_t>(weighted * cfg.levels / 256000u, cfg.levels - 1);
  };
  Matrix counts(cfg.levels, cfg.levels);
  double total = 0;
  for (const auto& [ax, ay] : pts)
    for (const auto& [bx, by] : pts)
      for (const Offset& o : cfg.offsets) {
        const bool fwd = bx - ax == o.dx && by - ay == o.dy;
        const bool back = bx - ax == -o.dx && by - ay == -o.dy;
        if (fwd || back) {
          counts(level(ax, ay), level(bx, by)) += 1;
          total += 1;
        }
      }
  for (double& v : counts.values()) v /= total;
  return counts;
}

}  // namespace

// --- Coat / body split ------------------------------------------------------------

TEST(CoatBody, ThresholdExamples) {
  EXPECT_TRUE(is_coat_pixel({100, 120, 130}));
  EXPECT_FALSE(is_coat_pixel({150, 80, 70}));
  EXPECT_TRUE(is_coat_pixel({200, 120, 125}));
  EXPECT_FALSE(is_coat_pixel({200, 120, 124}));
}

TEST(CoatBody, PartitionIsExhaustive) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    TongueObservation obs{random_image(23, 17, seed), ellipse_mask(23, 17)};
    const CoatBody parts = split_coat_body(obs);
    for (std::size_t y = 0; y < 17; ++y)
      for (std::size_t x = 0; x < 23; ++x) {
        const bool t = obs.mask.at(x, y), c = parts.coat.at(x, y), b = parts.body.at(x, y);
        EXPECT_EQ(c || b, t);
        EXPECT_FALSE(c && b);
        if (t) {
          const Rgb p = obs.image.at(x, y);
          EXPECT_EQ(c, p[0] - p[1] - p[2] <= -45);
        }
      }
  }
}

TEST(CoatBody, InvalidObservations) {
  TongueObservation empty{RgbImage(4, 4), Mask(4, 4)};
  EXPECT_THROW(split_coat_body(empty), DataError);
  TongueObservation mismatch{RgbImage(4, 4), Mask(4, 5, true)};
  EXPECT_THROW(split_coat_body(mismatch), DataError);
}

TEST(CoatRatio, Examples) {
  Mask tongue(10, 10, true);
  Mask coat(10, 10);
  EXPECT_EQ(coat_ratio(coat, tongue), 0.0);
  for (std::size_t i = 0; i < 25; ++i) coat.set(i % 10, i / 10, true);
  EXPECT_EQ(coat_ratio(coat, tongue), 0.25);
  EXPECT_EQ(coat_ratio(tongue, tongue), 1.0);
  EXPECT_THROW(coat_ratio(Mask(10, 10), Mask(10, 10)), DataError);
}

// --- Color spaces -------------------------------------------------------------------

TEST(Color, AchromaticHsi) {
  const Triple hsi = rgb_to_hsi({128, 128, 128});
  EXPECT_EQ(hsi[0], 0.0);
  EXPECT_EQ(hsi[1], 0.0);
  EXPECT_NEAR(hsi[2], 128.0 / 255.0, 1e-15);
  EXPECT_EQ(rgb_to_hsi({0, 0, 0}), (Triple{0, 0, 0}));
}

TEST(Color, HsiPrimaries) {
  EXPECT_NEAR(rgb_to_hsi({255, 0, 0})[0], 0.0, 1e-9);
  EXPECT_NEAR(rgb_to_hsi({0, 255, 0})[0], 120.0, 1e-9);
  EXPECT_NEAR(rgb_to_hsi({0, 0, 255})[0], 240.0, 1e-9);
  EXPECT_NEAR(rgb_to_hsi({255, 0, 0})[1], 1.0, 1e-15);
}

TEST(Color, HsiHueMatchesAtan2Form) {
  Rng rng(5);
  for (int i = 0; i < 5000; ++i) {
    const Rgb p{static_cast<std::uint8_t>(rng.below(256)), static_cast<std::uint8_t>(rng.below(256)),
                static_cast<std::uint8_t>(rng.below(256))};
    if (p[0] == p[1] && p[1] == p[2]) continue;
    double h = std::atan2(std::sqrt(3.0) * (p[1] - p[2]), 2.0 * p[0] - p[1] - p[2]) * 180.0 / std::numbers::pi;
    if (h < 0) h += 360.0;
    const double got = rgb_to_hsi(p)[0];
    const double diff = std::min(std::abs(got - h), 360.0 - std::abs(got - h));
    EXPECT_LT(diff, 1e-6) << int(p[0]) << "," << int(p[1]) << "," << int(p[2]);
  }
}

TEST(Color, YCrCbAgainstJfifMatrix) {
  Rng rng(6);
  for (int i = 0; i < 5000; ++i) {
    const Rgb p{static_cast<std::uint8_t>(rng.below(256)), static_cast<std::uint8_t>(rng.below(256)),
                static_cast<std::uint8_t>(rng.below(256))};
    const double r = p[0], g = p[1], b = p[2];
    const double y = 0.299 * r + 0.587 * g + 0.114 * b;
    const double cr = std::clamp(128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b, 0.0, 255.0);
    const double cb = std::clamp(128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b, 0.0, 255.0);
    const Triple got = rgb_to_ycrcb(p);
    EXPECT_NEAR(got[0], y, 1e-3);
    EXPECT_NEAR(got[1], cr, 1e-3);
    EXPECT_NEAR(got[2], cb, 1e-3);
  }
  const Triple red = rgb_to_ycrcb({255, 0, 0});
  EXPECT_NEAR(red[0], 76.245, 1e-9);
  EXPECT_EQ(red[1], 255.0);  // 255.5 before the clamp
  EXPECT_NEAR(red[2], 128.0 - 0.168736 * 255.0, 1e-3);
}

TEST(Color, LabReferenceValues) {
  const Triple white = rgb_to_lab({255, 255, 255});
  EXPECT_NEAR(white[0], 100.0, 1e-12);
  EXPECT_NEAR(white[1], 0.0, 1e-12);
  EXPECT_NEAR(white[2], 0.0, 1e-12);
  EXPECT_NEAR(rgb_to_lab({0, 0, 0})[0], 0.0, 1e-12);
  // Published sRGB/D65 reference points.
  const Triple red = rgb_to_lab({255, 0, 0});
  EXPECT_NEAR(red[0], 53.2408, 0.01);
  EXPECT_NEAR(red[1], 80.0925, 0.01);
  EXPECT_NEAR(red[2], 67.2032, 0.01);
  const Triple blue = rgb_to_lab({0, 0, 255});
  EXPECT_NEAR(blue[0], 32.2970, 0.01);
  EXPECT_NEAR(blue[1], 79.1875, 0.01);
  EXPECT_NEAR(blue[2], -107.8602, 0.01);
}

TEST(Color, RegionStatsRespectRanges) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const RgbImage img = random_image(31, 29, seed + 100);
    const RegionStats s = region_color_stats(img, ellipse_mask(31, 29));
    for (double v : {s.rgb[0], s.rgb[1], s.rgb[2], s.ycrcb[0], s.ycrcb[1], s.ycrcb[2]}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 255.0);
    }
    EXPECT_GE(s.hsi[0], 0.0);
    EXPECT_LT(s.hsi[0], 360.0);
    for (double v : {s.hsi[1], s.hsi[2]}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    EXPECT_GE(s.lab[0], 0.0);
    EXPECT_LE(s.lab[0], 100.0);
  }
}

TEST(Color, RegionStatsExamples) {
  RgbImage img(3, 1, {10, 20, 30});
  Mask m(3, 1, true);
  const RegionStats u = region_color_stats(img, m);
  EXPECT_EQ(u.rgb, (Triple{10, 20, 30}));
  img.set(0, 0, {100, 0, 0});
  img.set(1, 0, {200, 0, 0});
  m.set(2, 0, false);
  EXPECT_EQ(region_color_stats(img, m).rgb[0], 150.0);
  const RegionStats e = region_color_stats(img, Mask(3, 1));
  EXPECT_TRUE(e.empty);
  for (double v : e.flatten()) EXPECT_EQ(v, 0.0);
}

TEST(Color, RegionStatsMatchPerPixelReference) {
  const TongueObservation obs = fixture_observation();
  const RegionStats s = region_color_stats(obs.image, obs.mask);
  std::array<double, 12> acc{};
  double n = 0;
  for (std::size_t y = 0; y < obs.image.height(); ++y)
    for (std::size_t x = 0; x < obs.image.width(); ++x) {
      if (!obs.mask.at(x, y)) continue;
      const Rgb p = obs.image.at(x, y);
      const Triple h = rgb_to_hsi(p), c = rgb_to_ycrcb(p), l = rgb_to_lab(p);
      const double row[12] = {double(p[0]), double(p[1]), double(p[2]), h[0], h[1], h[2],
                              c[0], c[1], c[2], l[0], l[1], l[2]};
      for (int k = 0; k < 12; ++k) acc[k] += row[k];
      n += 1;
    }
  const auto flat = s.flatten();
  for (int k = 0; k < 12; ++k) EXPECT_NEAR(flat[k], acc[k] / n, 1e-9) << k;
}

// --- GLCM ------------------------------------------------------------------------

TEST(Glcm, ConstantRegion) {
  RgbImage img(6, 5, {100, 100, 100});
  const TextureStats t = glcm_texture(img, Mask(6, 5, true));
  EXPECT_EQ(t.con, 0.0);
  EXPECT_EQ(t.asm_, 1.0);
  EXPECT_EQ(t.ent, 0.0);
  EXPECT_EQ(t.mean, 25.0);  // floor(100 / 4)
}

TEST(Glcm, HorizontalCheckerboard) {
  RgbImage img(8, 8);
  for (std::size_t y = 0; y < 8; ++y)
    for (std::size_t x = 0; x < 8; ++x)
      if ((x + y) % 2) img.set(x, y, {4, 4, 4});
  GlcmConfig cfg;
  cfg.offsets = {{1, 0}};
  const Matrix p = glcm(img, Mask(8, 8, true), cfg);
  EXPECT_EQ(p(0, 1), 0.5);
  EXPECT_EQ(p(1, 0), 0.5);
  const TextureStats t = texture_from_glcm(p);
  EXPECT_EQ(t.con, 1.0);
  EXPECT_EQ(t.asm_, 0.5);
  EXPECT_NEAR(t.ent, 0.6931471805599453, 1e-15);
}

TEST(Glcm, MatchesBruteForceOnFixture) {
  const TongueObservation obs = fixture_observation();
  const CoatBody parts = split_coat_body(obs);
  for (const Mask* region : {&obs.mask, &parts.coat, &parts.body}) {
    const Matrix fast = glcm(obs.image, *region);
    const Matrix slow = brute_force_glcm(obs.image, *region, GlcmConfig{});
    ASSERT_EQ(fast.rows(), slow.rows());
    for (std::size_t i = 0; i < fast.size(); ++i) EXPECT_NEAR(fast.values()[i], slow.values()[i], 1e-12);
    const TextureStats a = texture_from_glcm(fast), b = texture_from_glcm(slow);
    EXPECT_NEAR(a.con, b.con, 1e-12);
    EXPECT_NEAR(a.asm_, b.asm_, 1e-12);
    EXPECT_NEAR(a.ent, b.ent, 1e-12);
    EXPECT_NEAR(a.mean, b.mean, 1e-12);
  }
}

TEST(Glcm, ProbabilityProperties) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Matrix p = glcm(random_image(20, 20, seed), ellipse_mask(20, 20));
    double sum = 0.0;
    for (std::size_t i = 0; i < p.rows(); ++i)
      for (std::size_t j = 0; j < p.cols(); ++j) {
        sum += p(i, j);
        EXPECT_EQ(p(i, j), p(j, i));
      }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    const TextureStats t = texture_from_glcm(p);
    EXPECT_GT(t.asm_, 0.0);
    EXPECT_LT(t.asm_, 1.0);
    EXPECT_GE(t.ent, 0.0);
    EXPECT_GE(t.con, 0.0);
  }
}

TEST(Glcm, NoValidPair) {
  Mask single(5, 5);
  single.set(2, 2, true);
  EXPECT_THROW(glcm(RgbImage(5, 5), single), DataError);
  Mask apart(5, 5);
  apart.set(0, 0, true);
  apart.set(2, 0, true);
  EXPECT_THROW(glcm(RgbImage(5, 5), apart), DataError);
}

// --- Morphology and detections ------------------------------------------------------

TEST(Morphology, Examples) {
  Mask m(200, 200);
  for (std::size_t i = 0; i < 4000; ++i) m.set(i % 100, i / 100, true);  // 40 high, 100 wide
  const Morphology a = morphology(m);
  EXPECT_EQ(a.area_ratio, 0.1);
  EXPECT_EQ(a.aspect_ratio, 0.4);
  Mask box(200, 200);
  for (std::size_t y = 10; y < 60; ++y)
    for (std::size_t x = 20; x < 120; ++x) box.set(x, y, true);
  EXPECT_EQ(morphology(box).aspect_ratio, 0.5);
  EXPECT_EQ(morphology(box, AspectDefinition::WidthOverHeight).aspect_ratio, 2.0);
  const Morphology full = morphology(Mask(64, 48, true));
  EXPECT_EQ(full.area_ratio, 1.0);
  EXPECT_EQ(full.aspect_ratio, 0.75);
  EXPECT_THROW(morphology(Mask(3, 3)), DataError);
}

TEST(Detections, CountAndUnionArea) {
  Mask tongue(10, 10, true);
  const std::vector<DetectionBox> boxes{
      {"crack", 0, 0, 5, 5},       // 25 pixel centres
      {"crack", 3, 3, 8, 8},       // overlaps by 4
      {"spot", 0, 0, 0.4, 0.4},    // covers no centre
      {"tooth_mark", 0, 0, 10, 1},  // one row
  };
  const DetectionInput d = summarize_detections(boxes, tongue);
  EXPECT_EQ(d.count, (std::array<double, 4>{2, 0, 1, 1}));
  EXPECT_EQ(d.area_ratio[0], 46.0 / 100.0);
  EXPECT_EQ(d.area_ratio[1], 0.0);
  EXPECT_EQ(d.area_ratio[2], 0.0);
  EXPECT_EQ(d.area_ratio[3], 0.1);
}

TEST(Detections, AreaOnlyCountsTonguePixels) {
  Mask tongue(10, 10);
  for (std::size_t x = 0; x < 10; ++x) tongue.set(x, 0, true);
  const DetectionInput d = summarize_detections({{"spot", 0, 0, 10, 10}}, tongue);
  EXPECT_EQ(d.area_ratio[2], 1.0);
}

TEST(Detections, Errors) {
  Mask tongue(4, 4, true);
  EXPECT_THROW(summarize_detections({{"freckle", 0, 0, 1, 1}}, tongue), DataError);
  EXPECT_THROW(summarize_detections({{"spot", 3, 0, 1, 1}}, tongue), DataError);
}

// --- Schema and feature vector -------------------------------------------------------

TEST(Schema, CanonicalLayout) {
  const FeatureSchema& s = tongue_schema();
  ASSERT_EQ(s.size(), 52u);
  EXPECT_EQ(s.name(0), "Gender");
  EXPECT_EQ(s.name(8), "BMI");
  EXPECT_EQ(s.name(9), "body_R");
  EXPECT_EQ(s.name(20), "body_b");
  EXPECT_EQ(s.name(21), "coat_R");
  EXPECT_EQ(s.name(33), "coat_ratio");
  EXPECT_EQ(s.name(34), "body_CON");
  EXPECT_EQ(s.name(41), "coat_MEAN");
  EXPECT_EQ(s.name(42), "area_ratio");
  EXPECT_EQ(s.name(43), "aspect_ratio");
  EXPECT_EQ(s.name(44), "crack_count");
  EXPECT_EQ(s.name(51), "tooth_mark_area");
  EXPECT_EQ(s.index_of("BMI"), 8u);
  EXPECT_FALSE(s.index_of("nope").has_value());
  EXPECT_THROW(FeatureSchema({"a", "a"}), DataError);
}

TEST(Physio, DerivedIndicators) {
  const auto f = physio_features(sample_physio());
  EXPECT_NEAR(f[8], 68.0 / (1.7 * 1.7), 1e-12);
  EXPECT_NEAR(f[8], 23.529411764705884, 1e-12);
  EXPECT_EQ(f[6], 0.8);
  EXPECT_NEAR(f[7], 80.0 / 170.0, 1e-15);
  PhysioRecord given = sample_physio();
  given.bmi = 30.0;
  EXPECT_EQ(physio_features(given)[8], 30.0);
}

TEST(Physio, MissingIndicatorIsNamed) {
  PhysioRecord r = sample_physio();
  r.hip.reset();
  try {
    physio_features(r);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("Hip Circumference"), std::string::npos);
  }
}

TEST(Physio, GenderEncoding) {
  EXPECT_EQ(encode_gender("M"), 1.0);
  EXPECT_EQ(encode_gender(" female "), 0.0);
  EXPECT_EQ(encode_gender("0"), 0.0);
  EXPECT_THROW(encode_gender("x"), DataError);
}

TEST(Features, FixtureVector) {
  const TongueObservation obs = fixture_observation();
  const DetectionInput det = summarize_detections({{"crack", 10, 10, 20, 20}}, obs.mask);
  const FeatureVector v = extract_features(obs, sample_physio(), det);
  ASSERT_EQ(v.values.size(), 52u);
  EXPECT_TRUE(v.flags.empty());
  const CoatBody parts = split_coat_body(obs);
  const RegionStats body = region_color_stats(obs.image, parts.body);
  const RegionStats coat = region_color_stats(obs.image, parts.coat);
  for (int k = 0; k < 12; ++k) {
    EXPECT_EQ(v.values[9 + k], body.flatten()[k]);
    EXPECT_EQ(v.values[21 + k], coat.flatten()[k]);
  }
  EXPECT_EQ(v.values[33], coat_ratio(parts.coat, obs.mask));
  EXPECT_GT(v.values[33], 0.0);
  EXPECT_LT(v.values[33], 1.0);
  EXPECT_EQ(v.values[41], glcm_texture(obs.image, parts.coat).mean);
  EXPECT_EQ(v.values[42], morphology(obs.mask).area_ratio);
  EXPECT_EQ(v.values[44], 1.0);
  EXPECT_EQ(v.values[45], det.area_ratio[0]);
  EXPECT_EQ(extract_features(obs, sample_physio(), det).values, v.values);
}

TEST(Features, PaleTongueFallsBackWithFlag) {
  TongueObservation obs{RgbImage(8, 8, {220, 60, 60}), Mask(8, 8, true)};
  const FeatureVector v = extract_features(obs, sample_physio(), {});
  ASSERT_EQ(v.values.size(), 52u);
  EXPECT_EQ(v.flags, (std::vector<std::string>{"coat_empty", "coat_texture_empty"}));
  for (int k = 21; k < 33; ++k) EXPECT_EQ(v.values[k], 0.0);
  for (int k = 38; k < 42; ++k) EXPECT_EQ(v.values[k], 0.0);
  EXPECT_EQ(v.values[33], 0.0);
}

TEST(Features, SchemaMismatch) {
  TongueObservation obs{RgbImage(4, 4, {220, 60, 60}), Mask(4, 4, true)};
  EXPECT_THROW(extract_features(obs, sample_physio(), {}, FeatureSchema({"a", "b"})), DataError);
}

// --- Image IO ----------------------------------------------------------------------

TEST(ImageIo, PngRoundTrip) {
  const TongueObservation obs = fixture_observation();
  const auto img_path = temp_path("img.png"), mask_path = temp_path("mask.png");
  write_rgb_png(obs.image, img_path);
  write_mask_png(obs.mask, mask_path);
  EXPECT_EQ(read_rgb_image(img_path), obs.image);
  EXPECT_EQ(read_mask(mask_path), obs.mask);
  std::filesystem::remove(img_path);
  std::filesystem::remove(mask_path);
}

TEST(ImageIo, ColoredMaskCountsAnyNonzeroChannel) {
  RgbImage m(3, 1);
  m.set(1, 0, {0, 0, 1});
  const auto path = temp_path("colormask.png");
  write_rgb_png(m, path);
  const Mask mask = read_mask(path);
  EXPECT_FALSE(mask.at(0, 0));
  EXPECT_TRUE(mask.at(1, 0));
  std::filesystem::remove(path);
}

TEST(ImageIo, UnreadableFile) {
  EXPECT_THROW(read_rgb_image(temp_path("missing.png")), DataError);
}

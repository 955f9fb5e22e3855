// SPDX-License-Identifier: Apache-2.0
#include "selnet/tongue/glcm.hpp"

#include <algorithm>
#include <cmath>

#include "selnet/errors.hpp"
#include "selnet/tongue/color.hpp"

namespace selnet::tongue {

std::size_t quantize(Rgb p, std::size_t levels) {
  const double q = std::floor(luma(p) * static_cast<double>(levels) / 256.0);
  return std::min(static_cast<std::size_t>(q), levels - 1);
}

Matrix glcm(const RgbImage& image, const Mask& region, const GlcmConfig& config) {
  if (config.levels < 2) throw PreconditionError("glcm: need at least 2 gray levels");
  if (image.width() != region.width() || image.height() != region.height()) {
    throw ShapeError("glcm: image and region sizes differ");
  }
  const long w = static_cast<long>(image.width()), h = static_cast<long>(image.height());
  std::vector<std::size_t> level(image.pixel_count());
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) level[y * w + x] = quantize(image.at(x, y), config.levels);
  }
  Matrix counts(config.levels, config.levels);
  double total = 0.0;
  for (const Offset& o : config.offsets) {
    for (long y = 0; y < h; ++y) {
      for (long x = 0; x < w; ++x) {
        const long x2 = x + o.dx, y2 = y + o.dy;
        if (x2 < 0 || x2 >= w || y2 < 0 || y2 >= h) continue;
        if (!region.at(x, y) || !region.at(x2, y2)) continue;
        const std::size_t a = level[y * w + x], b = level[y2 * w + x2];
        counts(a, b) += 1.0;
        counts(b, a) += 1.0;
        total += 2.0;
      }
    }
  }
  if (total == 0.0) throw DataError("glcm: region has no co-occurring pixel pair");
  for (double& v : counts.values()) v /= total;
  return counts;
}

TextureStats texture_from_glcm(const Matrix& p) {
  TextureStats t;
  for (std::size_t i = 0; i < p.rows(); ++i) {
    for (std::size_t j = 0; j < p.cols(); ++j) {
      const double v = p(i, j);
      if (v == 0.0) continue;
      const double d = static_cast<double>(i) - static_cast<double>(j);
      t.con += d * d * v;
      t.asm_ += v * v;
      t.ent -= v * std::log(v);
      t.mean += static_cast<double>(i) * v;
    }
  }
  return t;
}

TextureStats glcm_texture(const RgbImage& image, const Mask& region, const GlcmConfig& config) {
  return texture_from_glcm(glcm(image, region, config));
}

}  // namespace selnet::tongue

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "selnet/matrix.hpp"
#include "selnet/tongue/image.hpp"

namespace selnet::tongue {

struct Offset {
  int dx;
  int dy;
};

struct GlcmConfig {
  std::size_t levels = 64;
  /// Image coordinates (y grows downward): 0, 45, 90 and 135 degrees at distance 1.
  std::vector<Offset> offsets{{1, 0}, {1, -1}, {0, -1}, {-1, -1}};
};

/// Quantized luma: floor(luma * levels / 256), at most levels - 1.
std::size_t quantize(Rgb p, std::size_t levels);

/// Symmetric co-occurrence probabilities over pairs with both pixels in the region.
/// DataError if the region holds no such pair.
Matrix glcm(const RgbImage& image, const Mask& region, const GlcmConfig& config = {});

struct TextureStats {
  double con = 0.0;
  double asm_ = 0.0;
  double ent = 0.0;
  double mean = 0.0;
};

TextureStats texture_from_glcm(const Matrix& p);
TextureStats glcm_texture(const RgbImage& image, const Mask& region, const GlcmConfig& config = {});

}  // namespace selnet::tongue

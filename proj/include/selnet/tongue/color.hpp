// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>

#include "selnet/tongue/image.hpp"

namespace selnet::tongue {

using Triple = std::array<double, 3>;

/// H in degrees [0, 360), S and I in [0, 1]. Achromatic pixels get H = 0.
Triple rgb_to_hsi(Rgb p);
/// BT.601 full range, chroma offset 128, each channel clamped to [0, 255].
Triple rgb_to_ycrcb(Rgb p);
/// sRGB -> XYZ (D65) -> CIELAB. L clamped to [0, 100].
Triple rgb_to_lab(Rgb p);
/// BT.601 luma on 0..255.
double luma(Rgb p);

/// Coat threshold on R - (G + B).
inline constexpr int kCoatThreshold = -45;

inline bool is_coat_pixel(Rgb p, int threshold = kCoatThreshold) {
  return static_cast<int>(p[0]) - (static_cast<int>(p[1]) + static_cast<int>(p[2])) <= threshold;
}

struct CoatBody {
  Mask coat;
  Mask body;
};

CoatBody split_coat_body(const TongueObservation& obs, int threshold = kCoatThreshold);

/// |coat| / |tongue|.
double coat_ratio(const Mask& coat, const Mask& tongue);

struct RegionStats {
  Triple rgb{};
  Triple hsi{};
  Triple ycrcb{};
  Triple lab{};
  bool empty = false;

  /// R, G, B, H, S, I, Y, Cr, Cb, L, a, b.
  std::array<double, 12> flatten() const;
};

/// Per-pixel conversion, then channel means. An empty region yields zeros with empty = true.
RegionStats region_color_stats(const RgbImage& image, const Mask& region);

}  // namespace selnet::tongue

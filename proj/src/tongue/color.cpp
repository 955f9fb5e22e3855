// SPDX-License-Identifier: Apache-2.0
#include "selnet/tongue/color.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "selnet/errors.hpp"

namespace selnet::tongue {

Triple rgb_to_hsi(Rgb p) {
  const double r = p[0] / 255.0, g = p[1] / 255.0, b = p[2] / 255.0;
  const double sum = r + g + b;
  const double intensity = sum / 3.0;
  if (sum == 0.0) return {0.0, 0.0, 0.0};
  const double saturation = 1.0 - 3.0 * std::min({r, g, b}) / sum;
  if (saturation <= 0.0) return {0.0, 0.0, intensity};
  const double num = 0.5 * ((r - g) + (r - b));
  const double den = std::sqrt((r - g) * (r - g) + (r - b) * (g - b));
  if (den == 0.0) return {0.0, saturation, intensity};
  const double theta = std::acos(std::clamp(num / den, -1.0, 1.0)) * 180.0 / std::numbers::pi;
  double hue = b <= g ? theta : 360.0 - theta;
  if (hue >= 360.0) hue = 0.0;
  return {hue, saturation, intensity};
}

Triple rgb_to_ycrcb(Rgb p) {
  constexpr double kr = 0.299, kb = 0.114, kg = 1.0 - kr - kb;
  const double r = p[0], g = p[1], b = p[2];
  const double y = kr * r + kg * g + kb * b;
  const double cr = 128.0 + 0.5 * (r - y) / (1.0 - kr);
  const double cb = 128.0 + 0.5 * (b - y) / (1.0 - kb);
  return {std::clamp(y, 0.0, 255.0), std::clamp(cr, 0.0, 255.0), std::clamp(cb, 0.0, 255.0)};
}

namespace {

double srgb_to_linear(std::uint8_t v) {
  const double c = v / 255.0;
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

constexpr double kRgbToXyz[3][3] = {
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
};

double lab_f(double t) {
  constexpr double delta = 6.0 / 29.0;
  return t > delta * delta * delta ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

}  // namespace

Triple rgb_to_lab(Rgb p) {
  const double lin[3] = {srgb_to_linear(p[0]), srgb_to_linear(p[1]), srgb_to_linear(p[2])};
  double xyz[3], white[3];
  for (int i = 0; i < 3; ++i) {
    xyz[i] = kRgbToXyz[i][0] * lin[0] + kRgbToXyz[i][1] * lin[1] + kRgbToXyz[i][2] * lin[2];
    white[i] = kRgbToXyz[i][0] + kRgbToXyz[i][1] + kRgbToXyz[i][2];
  }
  const double fx = lab_f(xyz[0] / white[0]);
  const double fy = lab_f(xyz[1] / white[1]);
  const double fz = lab_f(xyz[2] / white[2]);
  return {std::clamp(116.0 * fy - 16.0, 0.0, 100.0), 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

double luma(Rgb p) { return (299 * p[0] + 587 * p[1] + 114 * p[2]) / 1000.0; }

CoatBody split_coat_body(const TongueObservation& obs, int threshold) {
  obs.validate();
  const std::size_t w = obs.image.width(), h = obs.image.height();
  CoatBody out{Mask(w, h), Mask(w, h)};
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      if (!obs.mask.at(x, y)) continue;
      if (is_coat_pixel(obs.image.at(x, y), threshold)) {
        out.coat.set(x, y, true);
      } else {
        out.body.set(x, y, true);
      }
    }
  }
  return out;
}

double coat_ratio(const Mask& coat, const Mask& tongue) {
  if (!coat.same_size(tongue)) throw ShapeError("coat_ratio: coat and tongue masks differ in size");
  const std::size_t total = tongue.count();
  if (total == 0) throw DataError("coat_ratio: empty tongue mask");
  std::size_t inside = 0;
  for (std::size_t y = 0; y < tongue.height(); ++y) {
    for (std::size_t x = 0; x < tongue.width(); ++x) {
      if (!coat.at(x, y)) continue;
      if (!tongue.at(x, y)) throw PreconditionError("coat_ratio: coat pixel outside the tongue mask");
      ++inside;
    }
  }
  return static_cast<double>(inside) / static_cast<double>(total);
}

std::array<double, 12> RegionStats::flatten() const {
  return {rgb[0], rgb[1], rgb[2], hsi[0], hsi[1], hsi[2], ycrcb[0], ycrcb[1], ycrcb[2], lab[0], lab[1], lab[2]};
}

RegionStats region_color_stats(const RgbImage& image, const Mask& region) {
  if (image.width() != region.width() || image.height() != region.height()) {
    throw ShapeError("region_color_stats: image and region sizes differ");
  }
  RegionStats s;
  std::size_t n = 0;
  for (std::size_t y = 0; y < image.height(); ++y) {
    for (std::size_t x = 0; x < image.width(); ++x) {
      if (!region.at(x, y)) continue;
      const Rgb p = image.at(x, y);
      const Triple hsi = rgb_to_hsi(p), ycc = rgb_to_ycrcb(p), lab = rgb_to_lab(p);
      for (int c = 0; c < 3; ++c) {
        s.rgb[c] += p[c];
        s.hsi[c] += hsi[c];
        s.ycrcb[c] += ycc[c];
        s.lab[c] += lab[c];
      }
      ++n;
    }
  }
  if (n == 0) {
    s.empty = true;
    return s;
  }
  const double inv = 1.0 / static_cast<double>(n);
  for (int c = 0; c < 3; ++c) {
    s.rgb[c] *= inv;
    s.hsi[c] *= inv;
    s.ycrcb[c] *= inv;
    s.lab[c] *= inv;
  }
  return s;
}

}  // namespace selnet::tongue

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace selnet::tongue {

using Rgb = std::array<std::uint8_t, 3>;

/// 8-bit RGB raster, interleaved, row-major.
class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(std::size_t width, std::size_t height, Rgb fill = {0, 0, 0});

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return width_ * height_; }

  Rgb at(std::size_t x, std::size_t y) const noexcept {
    const std::size_t i = 3 * (y * width_ + x);
    return {data_[i], data_[i + 1], data_[i + 2]};
  }
  void set(std::size_t x, std::size_t y, Rgb c) noexcept {
    const std::size_t i = 3 * (y * width_ + x);
    data_[i] = c[0];
    data_[i + 1] = c[1];
    data_[i + 2] = c[2];
  }

  const std::vector<std::uint8_t>& bytes() const noexcept { return data_; }
  friend bool operator==(const RgbImage&, const RgbImage&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Binary raster; true marks a region pixel.
class Mask {
 public:
  Mask() = default;
  Mask(std::size_t width, std::size_t height, bool fill = false);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  bool at(std::size_t x, std::size_t y) const noexcept { return data_[y * width_ + x] != 0; }
  void set(std::size_t x, std::size_t y, bool v) noexcept { data_[y * width_ + x] = v ? 1 : 0; }
  std::size_t count() const noexcept;
  bool same_size(const Mask& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::uint8_t> data_;
};

struct TongueObservation {
  RgbImage image;
  Mask mask;

  /// DataError unless dimensions match and the mask has a tongue pixel.
  void validate() const;
};

/// PNG or JPEG via OpenCV. DataError if the file cannot be decoded.
RgbImage read_rgb_image(const std::filesystem::path& path);
/// Any nonzero color channel marks a tongue pixel.
Mask read_mask(const std::filesystem::path& path);

void write_rgb_png(const RgbImage& image, const std::filesystem::path& path);
void write_mask_png(const Mask& mask, const std::filesystem::path& path);

}  // namespace selnet::tongue

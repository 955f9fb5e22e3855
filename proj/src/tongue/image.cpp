// SPDX-License-Identifier: Apache-2.0
#include "selnet/tongue/image.hpp"

#include <algorithm>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "selnet/errors.hpp"

namespace selnet::tongue {

RgbImage::RgbImage(std::size_t width, std::size_t height, Rgb fill)
    : width_(width), height_(height), data_(3 * width * height) {
  for (std::size_t i = 0; i < width * height; ++i) {
    data_[3 * i] = fill[0];
    data_[3 * i + 1] = fill[1];
    data_[3 * i + 2] = fill[2];
  }
}

Mask::Mask(std::size_t width, std::size_t height, bool fill)
    : width_(width), height_(height), data_(width * height, fill ? 1 : 0) {}

std::size_t Mask::count() const noexcept {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

void TongueObservation::validate() const {
  if (image.width() != mask.width() || image.height() != mask.height()) {
    throw DataError("observation: image is " + std::to_string(image.width()) + "x" +
                    std::to_string(image.height()) + " but mask is " + std::to_string(mask.width()) + "x" +
                    std::to_string(mask.height()));
  }
  if (mask.count() == 0) throw DataError("observation: mask has no tongue pixels");
}

namespace {

cv::Mat decode(const std::filesystem::path& path, int flags) {
  cv::Mat m = cv::imread(path.string(), flags);
  if (m.empty()) throw DataError("cannot read image " + path.string());
  if (m.depth() != CV_8U) {
    throw DataError("image " + path.string() + " is not 8-bit per channel");
  }
  return m;
}

}  // namespace

RgbImage read_rgb_image(const std::filesystem::path& path) {
  const cv::Mat m = decode(path, cv::IMREAD_COLOR);
  RgbImage img(static_cast<std::size_t>(m.cols), static_cast<std::size_t>(m.rows));
  for (int y = 0; y < m.rows; ++y) {
    const auto* row = m.ptr<cv::Vec3b>(y);
    for (int x = 0; x < m.cols; ++x) {
      img.set(static_cast<std::size_t>(x), static_cast<std::size_t>(y), {row[x][2], row[x][1], row[x][0]});
    }
  }
  return img;
}

Mask read_mask(const std::filesystem::path& path) {
  const cv::Mat m = decode(path, cv::IMREAD_UNCHANGED);
  const int channels = std::min(m.channels(), 3);
  Mask mask(static_cast<std::size_t>(m.cols), static_cast<std::size_t>(m.rows));
  for (int y = 0; y < m.rows; ++y) {
    const std::uint8_t* row = m.ptr<std::uint8_t>(y);
    for (int x = 0; x < m.cols; ++x) {
      bool on = false;
      for (int c = 0; c < channels; ++c) on = on || row[x * m.channels() + c] != 0;
      mask.set(static_cast<std::size_t>(x), static_cast<std::size_t>(y), on);
    }
  }
  return mask;
}

void write_rgb_png(const RgbImage& image, const std::filesystem::path& path) {
  cv::Mat m(static_cast<int>(image.height()), static_cast<int>(image.width()), CV_8UC3);
  for (std::size_t y = 0; y < image.height(); ++y) {
    auto* row = m.ptr<cv::Vec3b>(static_cast<int>(y));
    for (std::size_t x = 0; x < image.width(); ++x) {
      const Rgb p = image.at(x, y);
      row[x] = cv::Vec3b(p[2], p[1], p[0]);
    }
  }
  if (!cv::imwrite(path.string(), m)) throw DataError("cannot write image " + path.string());
}

void write_mask_png(const Mask& mask, const std::filesystem::path& path) {
  cv::Mat m(static_cast<int>(mask.height()), static_cast<int>(mask.width()), CV_8UC1);
  for (std::size_t y = 0; y < mask.height(); ++y) {
    auto* row = m.ptr<std::uint8_t>(static_cast<int>(y));
    for (std::size_t x = 0; x < mask.width(); ++x) row[x] = mask.at(x, y) ? 255 : 0;
  }
  if (!cv::imwrite(path.string(), m)) throw DataError("cannot write mask " + path.string());
}

}  // namespace selnet::tongue

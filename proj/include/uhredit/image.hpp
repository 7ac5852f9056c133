// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

namespace uhredit {

enum class SampleFormat { U8, UnitReal };

/// H x W x C raster in row-major, channel-interleaved order.
///
/// Samples are stored either as 8-bit integers or as unit-interval floats; the
/// `format()` tag records which. All metric code reads pixels through `at()`,
/// which always returns a value in [0,1].
class ImageTensor {
 public:
  ImageTensor() = default;
  ImageTensor(int height, int width, int channels, std::vector<std::uint8_t> samples);
  ImageTensor(int height, int width, int channels, std::vector<float> samples);

  static ImageTensor filled(int height, int width, int channels, float value);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(height_) * width_; }
  std::size_t sample_count() const { return pixel_count() * channels_; }
  SampleFormat format() const;
  bool empty() const { return sample_count() == 0; }

  float at(int y, int x, int c) const {
    const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
    if (const auto* u8 = std::get_if<std::vector<std::uint8_t>>(&samples_)) {
      return static_cast<float>((*u8)[i]) * (1.0f / 255.0f);
    }
    return std::get<std::vector<float>>(samples_)[i];
  }

  /// Writes a unit-interval value; U8 images are quantized with rounding.
  void set(int y, int x, int c, float value);

  std::span<const std::uint8_t> u8_samples() const;
  std::span<const float> real_samples() const;

  /// Raw sample bytes, used as the key material for content digests.
  std::span<const std::byte> bytes() const;

  ImageTensor to_unit_real() const;
  ImageTensor to_u8() const;

  /// Copies the [y0, y0+h) x [x0, x0+w) window.
  ImageTensor crop(int y0, int x0, int h, int w) const;

  bool operator==(const ImageTensor& other) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::variant<std::vector<std::uint8_t>, std::vector<float>> samples_;
};

/// Single-channel luminance in [0,1], row-major.
struct GrayImage {
  int height = 0;
  int width = 0;
  std::vector<double> data;

  GrayImage() = default;
  GrayImage(int h, int w, double fill = 0.0)
      : height(h), width(w), data(static_cast<std::size_t>(h) * w, fill) {}
  GrayImage(int h, int w, std::vector<double> values);

  double& at(int y, int x) { return data[static_cast<std::size_t>(y) * width + x]; }
  double at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }
};

/// Area-weighted resampling to an arbitrary target size.
GrayImage resize_area(const GrayImage& img, int out_height, int out_width);

/// Area-weighted resampling of every channel; output is unit-real.
ImageTensor resize_area(const ImageTensor& img, int out_height, int out_width);

/// Separable box blur of the given radius with clamped borders.
GrayImage box_blur(const GrayImage& img, int radius);
ImageTensor box_blur(const ImageTensor& img, int radius);

// --- codecs (8-bit PNG/JPEG) ---

/// Decodes PNG/JPEG bytes into an 8-bit RGB or gray image. Throws IoError.
ImageTensor decode_image(std::span<const std::uint8_t> encoded);

ImageTensor read_image(const std::filesystem::path& path);

/// Writes an 8-bit PNG (unit-real images are quantized).
void write_png(const std::filesystem::path& path, const ImageTensor& img);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

}  // namespace uhredit

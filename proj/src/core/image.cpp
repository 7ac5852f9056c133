// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#include "uhredit/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "uhredit/error.hpp"

namespace uhredit {

namespace {

void check_geometry(int h, int w, int c, std::size_t n) {
  if (h < 1 || w < 1) throw InvalidArgument("image dimensions must be positive");
  if (c != 1 && c != 3) throw InvalidArgument("image must have 1 or 3 channels, got " + std::to_string(c));
  if (n != static_cast<std::size_t>(h) * w * c) {
    throw InvalidArgument("sample count does not match height*width*channels");
  }
}

std::uint8_t quantize(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

// Weights of the source cells overlapping each destination cell on one axis.
struct AreaTap {
  int src;
  double weight;
};

std::vector<std::vector<AreaTap>> area_taps(int src_len, int dst_len) {
  std::vector<std::vector<AreaTap>> taps(dst_len);
  const double scale = static_cast<double>(src_len) / dst_len;
  for (int d = 0; d < dst_len; ++d) {
    const double lo = d * scale;
    const double hi = (d + 1) * scale;
    for (int s = static_cast<int>(std::floor(lo)); s < std::min(src_len, static_cast<int>(std::ceil(hi))); ++s) {
      const double overlap = std::min(hi, s + 1.0) - std::max(lo, static_cast<double>(s));
      if (overlap > 0) taps[d].push_back({s, overlap / scale});
    }
  }
  return taps;
}

}  // namespace

ImageTensor::ImageTensor(int height, int width, int channels, std::vector<std::uint8_t> samples)
    : height_(height), width_(width), channels_(channels), samples_(std::move(samples)) {
  check_geometry(height, width, channels, std::get<0>(samples_).size());
}

ImageTensor::ImageTensor(int height, int width, int channels, std::vector<float> samples)
    : height_(height), width_(width), channels_(channels), samples_(std::move(samples)) {
  const auto& v = std::get<1>(samples_);
  check_geometry(height, width, channels, v.size());
  for (float s : v) {
    if (!(s >= 0.0f && s <= 1.0f)) throw InvalidArgument("unit-real samples must lie in [0,1]");
  }
}

ImageTensor ImageTensor::filled(int height, int width, int channels, float value) {
  return ImageTensor(height, width, channels,
                     std::vector<float>(static_cast<std::size_t>(height) * width * channels, value));
}

SampleFormat ImageTensor::format() const {
  return std::holds_alternative<std::vector<std::uint8_t>>(samples_) ? SampleFormat::U8 : SampleFormat::UnitReal;
}

void ImageTensor::set(int y, int x, int c, float value) {
  const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  if (auto* u8 = std::get_if<std::vector<std::uint8_t>>(&samples_)) {
    (*u8)[i] = quantize(value);
  } else {
    std::get<std::vector<float>>(samples_)[i] = std::clamp(value, 0.0f, 1.0f);
  }
}

std::span<const std::uint8_t> ImageTensor::u8_samples() const {
  if (const auto* u8 = std::get_if<std::vector<std::uint8_t>>(&samples_)) return *u8;
  throw InvalidArgument("image is not stored as 8-bit samples");
}

std::span<const float> ImageTensor::real_samples() const {
  if (const auto* f = std::get_if<std::vector<float>>(&samples_)) return *f;
  throw InvalidArgument("image is not stored as unit-real samples");
}

std::span<const std::byte> ImageTensor::bytes() const {
  return std::visit([](const auto& v) { return std::as_bytes(std::span(v)); }, samples_);
}

ImageTensor ImageTensor::to_unit_real() const {
  if (format() == SampleFormat::UnitReal) return *this;
  const auto u8 = u8_samples();
  std::vector<float> out(u8.size());
  std::transform(u8.begin(), u8.end(), out.begin(), [](std::uint8_t v) { return v * (1.0f / 255.0f); });
  return ImageTensor(height_, width_, channels_, std::move(out));
}

ImageTensor ImageTensor::to_u8() const {
  if (format() == SampleFormat::U8) return *this;
  const auto f = real_samples();
  std::vector<std::uint8_t> out(f.size());
  std::transform(f.begin(), f.end(), out.begin(), quantize);
  return ImageTensor(height_, width_, channels_, std::move(out));
}

ImageTensor ImageTensor::crop(int y0, int x0, int h, int w) const {
  if (y0 < 0 || x0 < 0 || h < 1 || w < 1 || y0 + h > height_ || x0 + w > width_) {
    throw InvalidArgument("crop window outside image");
  }
  return std::visit(
      [&](const auto& v) {
        using T = typename std::decay_t<decltype(v)>::value_type;
        std::vector<T> out;
        out.reserve(static_cast<std::size_t>(h) * w * channels_);
        for (int y = y0; y < y0 + h; ++y) {
          const auto row = v.begin() + (static_cast<std::ptrdiff_t>(y) * width_ + x0) * channels_;
          out.insert(out.end(), row, row + static_cast<std::ptrdiff_t>(w) * channels_);
        }
        return ImageTensor(h, w, channels_, std::move(out));
      },
      samples_);
}

GrayImage::GrayImage(int h, int w, std::vector<double> values) : height(h), width(w), data(std::move(values)) {
  if (data.size() != static_cast<std::size_t>(h) * w) throw InvalidArgument("gray image size mismatch");
}

GrayImage resize_area(const GrayImage& img, int out_height, int out_width) {
  if (out_height < 1 || out_width < 1) throw InvalidArgument("resize target must be positive");
  const auto ty = area_taps(img.height, out_height);
  const auto tx = area_taps(img.width, out_width);
  GrayImage rows(img.height, out_width);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      double acc = 0.0;
      for (const auto& t : tx[x]) acc += t.weight * img.at(y, t.src);
      rows.at(y, x) = acc;
    }
  }
  GrayImage out(out_height, out_width);
  for (int y = 0; y < out_height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      double acc = 0.0;
      for (const auto& t : ty[y]) acc += t.weight * rows.at(t.src, x);
      out.at(y, x) = acc;
    }
  }
  return out;
}

ImageTensor resize_area(const ImageTensor& img, int out_height, int out_width) {
  std::vector<float> out(static_cast<std::size_t>(out_height) * out_width * img.channels());
  for (int c = 0; c < img.channels(); ++c) {
    GrayImage plane(img.height(), img.width());
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) plane.at(y, x) = img.at(y, x, c);
    const GrayImage r = resize_area(plane, out_height, out_width);
    for (std::size_t i = 0; i < r.size(); ++i) {
      out[i * img.channels() + c] = static_cast<float>(std::clamp(r.data[i], 0.0, 1.0));
    }
  }
  return ImageTensor(out_height, out_width, img.channels(), std::move(out));
}

GrayImage box_blur(const GrayImage& img, int radius) {
  if (radius <= 0) return img;
  const double norm = 1.0 / (2 * radius + 1);
  GrayImage tmp(img.height, img.width);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) acc += img.at(y, std::clamp(x + k, 0, img.width - 1));
      tmp.at(y, x) = acc * norm;
    }
  }
  GrayImage out(img.height, img.width);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) acc += tmp.at(std::clamp(y + k, 0, img.height - 1), x);
      out.at(y, x) = acc * norm;
    }
  }
  return out;
}

ImageTensor box_blur(const ImageTensor& img, int radius) {
  ImageTensor out = img.to_unit_real();
  for (int c = 0; c < img.channels(); ++c) {
    GrayImage plane(img.height(), img.width());
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) plane.at(y, x) = img.at(y, x, c);
    const GrayImage b = box_blur(plane, radius);
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) out.set(y, x, c, static_cast<float>(b.at(y, x)));
  }
  return img.format() == SampleFormat::U8 ? out.to_u8() : out;
}

ImageTensor decode_image(std::span<const std::uint8_t> encoded) {
  if (encoded.empty()) throw IoError("empty image buffer");
  const cv::Mat buf(1, static_cast<int>(encoded.size()), CV_8UC1, const_cast<std::uint8_t*>(encoded.data()));
  cv::Mat m;
  try {
    m = cv::imdecode(buf, cv::IMREAD_ANYCOLOR);
  } catch (const cv::Exception& e) {
    throw IoError(std::string("image decode failed: ") + e.what());
  }
  if (m.empty() || m.depth() != CV_8U) throw IoError("image decode failed or not 8-bit");
  const int stride = m.channels();
  const int channels = stride == 1 ? 1 : 3;
  std::vector<std::uint8_t> samples(static_cast<std::size_t>(m.rows) * m.cols * channels);
  for (int y = 0; y < m.rows; ++y) {
    const std::uint8_t* row = m.ptr<std::uint8_t>(y);
    std::uint8_t* dst = samples.data() + static_cast<std::size_t>(y) * m.cols * channels;
    for (int x = 0; x < m.cols; ++x) {
      if (channels == 1) {
        dst[x] = row[x];
      } else {
        dst[3 * x + 0] = row[stride * x + 2];
        dst[3 * x + 1] = row[stride * x + 1];
        dst[3 * x + 2] = row[stride * x + 0];
      }
    }
  }
  return ImageTensor(m.rows, m.cols, channels, std::move(samples));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

ImageTensor read_image(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_image(bytes);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_png(const std::filesystem::path& path, const ImageTensor& img) {
  const ImageTensor u8 = img.to_u8();
  const auto s = u8.u8_samples();
  cv::Mat m(u8.height(), u8.width(), u8.channels() == 1 ? CV_8UC1 : CV_8UC3);
  for (int y = 0; y < u8.height(); ++y) {
    std::uint8_t* row = m.ptr<std::uint8_t>(y);
    const std::uint8_t* src = s.data() + static_cast<std::size_t>(y) * u8.width() * u8.channels();
    for (int x = 0; x < u8.width(); ++x) {
      if (u8.channels() == 1) {
        row[x] = src[x];
      } else {
        row[3 * x + 0] = src[3 * x + 2];
        row[3 * x + 1] = src[3 * x + 1];
        row[3 * x + 2] = src[3 * x + 0];
      }
    }
  }
  if (!cv::imwrite(path.string(), m)) throw IoError("cannot write " + path.string());
}

}  // namespace uhredit

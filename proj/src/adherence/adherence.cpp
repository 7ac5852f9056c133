// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#include "uhredit/adherence/adherence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace uhredit::adherence {

namespace {

void check_same_geometry(const ImageTensor& a, const ImageTensor& b) {
  if (a.height() != b.height() || a.width() != b.width() || a.channels() != b.channels()) {
    throw InvalidArgument("image pair dimensions differ");
  }
}

// Separable running max (dilate) or min (erode) over a (2r+1)^2 square.
EditMask morph(const EditMask& m, int radius, bool dilation) {
  if (radius <= 0) return m;
  const std::uint8_t pad = dilation ? 0 : 1;
  const auto combine = [dilation](std::uint8_t a, std::uint8_t b) {
    return dilation ? std::max(a, b) : std::min(a, b);
  };
  EditMask tmp(m.height, m.width), out(m.height, m.width);
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      std::uint8_t acc = dilation ? 0 : 1;
      for (int k = -radius; k <= radius; ++k) {
        const int xx = x + k;
        acc = combine(acc, (xx < 0 || xx >= m.width) ? pad : m.data[static_cast<std::size_t>(y) * m.width + xx]);
      }
      tmp.data[static_cast<std::size_t>(y) * m.width + x] = acc;
    }
  }
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      std::uint8_t acc = dilation ? 0 : 1;
      for (int k = -radius; k <= radius; ++k) {
        const int yy = y + k;
        acc = combine(acc, (yy < 0 || yy >= m.height) ? pad : tmp.data[static_cast<std::size_t>(yy) * m.width + x]);
      }
      out.data[static_cast<std::size_t>(y) * m.width + x] = acc;
    }
  }
  return out;
}

}  // namespace

std::size_t EditMask::count() const {
  return static_cast<std::size_t>(std::count_if(data.begin(), data.end(), [](std::uint8_t v) { return v != 0; }));
}

EditMask read_mask(const std::filesystem::path& path) {
  const ImageTensor img = read_image(path);
  EditMask m(img.height(), img.width());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      bool edited = false;
      for (int c = 0; c < img.channels(); ++c) edited = edited || img.at(y, x, c) > 0.0f;
      m.set(y, x, edited);
    }
  }
  return m;
}

EditMask dilate(const EditMask& m, int radius) { return morph(m, radius, true); }
EditMask erode(const EditMask& m, int radius) { return morph(m, radius, false); }
EditMask morph_close(const EditMask& m, int radius) { return erode(dilate(m, radius), radius); }
EditMask morph_open(const EditMask& m, int radius) { return dilate(erode(m, radius), radius); }

EditMask diff_mask(const ImageTensor& input, const ImageTensor& edited, double pixel_threshold, int morph_radius) {
  check_same_geometry(input, edited);
  EditMask raw(input.height(), input.width());
  #pragma omp parallel for schedule(static)
  for (int y = 0; y < input.height(); ++y) {
    for (int x = 0; x < input.width(); ++x) {
      double d = 0.0;
      for (int c = 0; c < input.channels(); ++c) {
        d = std::max(d, std::abs(static_cast<double>(input.at(y, x, c)) - edited.at(y, x, c)));
      }
      raw.set(y, x, d > pixel_threshold);
    }
  }
  return morph_open(morph_close(raw, morph_radius), morph_radius);
}

BoundingBox mask_bounding_box(const EditMask& mask) {
  int y0 = mask.height, x0 = mask.width, y1 = -1, x1 = -1;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.at(y, x)) continue;
      y0 = std::min(y0, y);
      x0 = std::min(x0, x);
      y1 = std::max(y1, y);
      x1 = std::max(x1, x);
    }
  }
  if (y1 < 0) throw NoEditRegion();
  return {y0, x0, y1 - y0 + 1, x1 - x0 + 1};
}

double edited_region_alignment(const ImageTensor& edited, const EditMask& mask,
                               std::span<const float> instruction_embedding,
                               const curation::EmbeddingProvider& provider, const std::string& crop_key) {
  if (mask.height != edited.height() || mask.width != edited.width()) {
    throw InvalidArgument("mask dimensions differ from image");
  }
  const BoundingBox box = mask_bounding_box(mask);
  const ImageTensor crop = edited.crop(box.y0, box.x0, box.height, box.width);
  return curation::semantic_similarity(provider.embed(crop, crop_key), instruction_embedding);
}

double unedited_region_distance(const ImageTensor& input, const ImageTensor& edited, const EditMask& mask,
                                DistanceMode mode) {
  check_same_geometry(input, edited);
  if (mask.height != input.height() || mask.width != input.width()) {
    throw InvalidArgument("mask dimensions differ from image");
  }
  double sum_sq = 0.0;
  std::size_t samples = 0;
  #pragma omp parallel for reduction(+ : sum_sq, samples) schedule(static)
  for (int y = 0; y < input.height(); ++y) {
    for (int x = 0; x < input.width(); ++x) {
      if (mask.at(y, x)) continue;
      for (int c = 0; c < input.channels(); ++c) {
        const double d = static_cast<double>(input.at(y, x, c)) - edited.at(y, x, c);
        sum_sq += d * d;
      }
      samples += static_cast<std::size_t>(input.channels());
    }
  }
  if (samples == 0) return 0.0;
  return mode == DistanceMode::rms ? std::sqrt(sum_sq / static_cast<double>(samples)) : std::sqrt(sum_sq);
}

AdherenceVerdict adherence_verdict(double edited_alignment, double unedited_distance, double min_alignment,
                                   double max_distance) {
  return (edited_alignment >= min_alignment && unedited_distance <= max_distance) ? AdherenceVerdict::keep
                                                                                  : AdherenceVerdict::drop;
}

const char* to_string(AdherenceVerdict v) { return v == AdherenceVerdict::keep ? "keep" : "drop"; }

}  // namespace uhredit::adherence

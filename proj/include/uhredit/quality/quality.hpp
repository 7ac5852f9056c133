// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "uhredit/image.hpp"

namespace uhredit::quality {

/// Closed interval [low, high]; infinite ends express one-sided bounds.
struct Range {
  double low = -std::numeric_limits<double>::infinity();
  double high = std::numeric_limits<double>::infinity();

  bool contains(double v) const { return v >= low && v <= high; }
  bool well_ordered() const { return low <= high; }
};

struct TextureFeatures {
  double contrast = 0.0;
  double energy = 0.0;
  double homogeneity = 0.0;
  double entropy = 0.0;
};

struct GlcmOffset {
  int dy = 0;
  int dx = 0;
};

inline constexpr std::array<GlcmOffset, 4> kDefaultGlcmOffsets{{{0, 1}, {1, 0}, {1, 1}, {1, -1}}};
inline constexpr int kDefaultGlcmLevels = 16;

struct TextureBounds {
  Range contrast;
  Range energy;
  Range homogeneity;
  // Only the low tail is filtered by default.
  Range entropy{0.5, std::numeric_limits<double>::infinity()};
};

struct QualityThresholds {
  double min_sharpness = 0.0;
  Range luminance_range{0.15, 0.85};
  Range saturation_range{0.02, 0.85};
  TextureBounds texture_bounds;
  double max_aspect_ratio = 2.5;

  /// Throws InvalidArgument when a range is inverted or max_aspect_ratio < 1.
  void validate() const;
};

struct QualityOptions {
  int glcm_levels = kDefaultGlcmLevels;
  std::vector<GlcmOffset> glcm_offsets{kDefaultGlcmOffsets.begin(), kDefaultGlcmOffsets.end()};
  /// 0 processes the image in one pass; otherwise metrics are averaged over
  /// non-overlapping tiles of this side length.
  int tile_size = 0;
};

// Stable measurement names.
inline constexpr const char* kTenengrad = "tenengrad";
inline constexpr const char* kMeanLuminance = "mean_luminance";
inline constexpr const char* kMeanSaturation = "mean_saturation";
inline constexpr const char* kGlcmContrast = "glcm_contrast";
inline constexpr const char* kGlcmEnergy = "glcm_energy";
inline constexpr const char* kGlcmHomogeneity = "glcm_homogeneity";
inline constexpr const char* kGlcmEntropy = "glcm_entropy";
inline constexpr const char* kAspectRatio = "aspect_ratio";

// Check identifiers, in the order they are evaluated and reported.
inline constexpr const char* kCheckAspectRatio = "aspect_ratio";
inline constexpr const char* kCheckExposure = "exposure";
inline constexpr const char* kCheckSaturation = "saturation";
inline constexpr const char* kCheckSharpness = "sharpness";
inline constexpr const char* kCheckTexture = "texture";

struct QualityVerdict {
  bool passed = true;
  std::vector<std::string> failed_checks;
  std::map<std::string, double> measurements;
};

struct SaturationStats {
  double mean = 0.0;
  double stddev = 0.0;
};

/// Rec.709 luma for 3-channel images; identity (normalized to [0,1]) for 1-channel.
GrayImage to_grayscale(const ImageTensor& img);

/// Mean of Gx^2 + Gy^2 over interior pixels, with 3x3 Sobel responses.
double tenengrad(const GrayImage& img);

double exposure_stats(const GrayImage& img);

/// HSV saturation (max-min)/max per pixel, 0 where max is 0.
SaturationStats saturation_stats(const ImageTensor& img);

/// Quantizes luminance into `levels` uniform bins.
std::vector<std::uint16_t> quantize_levels(const GrayImage& img, int levels);

/// Symmetric co-occurrence counts (levels x levels, row-major) accumulated
/// over every offset into one joint matrix.
std::vector<std::uint64_t> glcm_counts(const GrayImage& img, int levels, std::span<const GlcmOffset> offsets);

/// Contrast/energy/homogeneity/entropy of the normalized joint matrix.
TextureFeatures glcm_features(const GrayImage& img, int levels, std::span<const GlcmOffset> offsets);
TextureFeatures texture_from_counts(std::span<const std::uint64_t> counts, int levels);

/// All eight named measurements, computed once.
std::map<std::string, double> measure(const ImageTensor& img, const QualityOptions& options = {});

/// Applies the thresholds to a measurement map produced by `measure`.
QualityVerdict judge(const std::map<std::string, double>& measurements, const QualityThresholds& thresholds);

QualityVerdict assess_quality(const ImageTensor& img, const QualityThresholds& thresholds,
                              const QualityOptions& options = {});

/// Sequential twins of the OpenMP kernels above; kept as the reference the
/// parallel versions are tested against.
namespace serial {
double tenengrad(const GrayImage& img);
std::vector<std::uint64_t> glcm_counts(const GrayImage& img, int levels, std::span<const GlcmOffset> offsets);
}  // namespace serial

}  // namespace uhredit::quality

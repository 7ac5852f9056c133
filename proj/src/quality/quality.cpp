// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#include "uhredit/quality/quality.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "uhredit/error.hpp"
#include "uhredit/parallel.hpp"

namespace uhredit::quality {

namespace {

// Sum of Gx^2 + Gy^2 along one interior row.
double sobel_row_energy(const GrayImage& img, int y) {
  const int w = img.width;
  const double* up = img.data.data() + static_cast<std::size_t>(y - 1) * w;
  const double* mid = up + w;
  const double* dn = mid + w;
  double acc = 0.0;
  for (int x = 1; x < w - 1; ++x) {
    const double gx = (up[x + 1] + 2.0 * mid[x + 1] + dn[x + 1]) - (up[x - 1] + 2.0 * mid[x - 1] + dn[x - 1]);
    const double gy = (dn[x - 1] + 2.0 * dn[x] + dn[x + 1]) - (up[x - 1] + 2.0 * up[x] + up[x + 1]);
    acc += gx * gx + gy * gy;
  }
  return acc;
}

void check_tenengrad_input(const GrayImage& img) {
  if (img.height < 3 || img.width < 3) throw InvalidArgument("tenengrad needs an image of at least 3x3");
}

void check_glcm_input(const GrayImage& img, int levels, std::span<const GlcmOffset> offsets) {
  if (levels < 2 || levels > 65535) throw InvalidArgument("glcm levels must be in [2, 65535]");
  if (offsets.empty()) throw InvalidArgument("glcm needs at least one offset");
  for (const auto& o : offsets) {
    if (o.dy == 0 && o.dx == 0) throw InvalidArgument("glcm offset must be nonzero");
    if (std::abs(o.dy) >= img.height || std::abs(o.dx) >= img.width) {
      throw InvalidArgument("glcm offset exceeds image extent");
    }
  }
}

// Counts pairs for rows [y_begin, y_end) of the anchor pixel into `counts`.
void accumulate_pairs(const std::vector<std::uint16_t>& q, int h, int w, int levels, const GlcmOffset& o,
                      int y_begin, int y_end, std::uint64_t* counts) {
  const int x_lo = std::max(0, -o.dx);
  const int x_hi = std::min(w, w - o.dx);
  for (int y = std::max(y_begin, -o.dy); y < std::min(y_end, h - o.dy); ++y) {
    const std::uint16_t* a = q.data() + static_cast<std::size_t>(y) * w;
    const std::uint16_t* b = q.data() + static_cast<std::size_t>(y + o.dy) * w + o.dx;
    for (int x = x_lo; x < x_hi; ++x) {
      const std::size_t i = a[x];
      const std::size_t j = b[x];
      ++counts[i * levels + j];
      ++counts[j * levels + i];
    }
  }
}

// Splits [0, len) into spans of `tile` length; a trailing remainder shorter
// than 3 pixels is folded into the previous span.
std::vector<std::pair<int, int>> tile_spans(int len, int tile) {
  std::vector<std::pair<int, int>> spans;
  for (int start = 0; start < len; start += tile) spans.emplace_back(start, std::min(len, start + tile));
  if (spans.size() > 1 && spans.back().second - spans.back().first < 3) {
    const int end = spans.back().second;
    spans.pop_back();
    spans.back().second = end;
  }
  return spans;
}

GrayImage crop_gray(const GrayImage& g, int y0, int y1, int x0, int x1) {
  GrayImage out(y1 - y0, x1 - x0);
  for (int y = y0; y < y1; ++y) {
    std::copy_n(g.data.begin() + static_cast<std::ptrdiff_t>(y) * g.width + x0, x1 - x0,
                out.data.begin() + static_cast<std::ptrdiff_t>(y - y0) * out.width);
  }
  return out;
}

}  // namespace

void QualityThresholds::validate() const {
  const Range* ranges[] = {&luminance_range, &saturation_range, &texture_bounds.contrast,
                           &texture_bounds.energy, &texture_bounds.homogeneity, &texture_bounds.entropy};
  for (const Range* r : ranges) {
    if (!r->well_ordered()) throw InvalidArgument("threshold range is not well ordered");
  }
  if (!(max_aspect_ratio >= 1.0)) throw InvalidArgument("max_aspect_ratio must be >= 1");
}

GrayImage to_grayscale(const ImageTensor& img) {
  if (img.channels() != 1 && img.channels() != 3) throw InvalidArgument("to_grayscale expects 1 or 3 channels");
  GrayImage out(img.height(), img.width());
  #pragma omp parallel for schedule(static)
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (img.channels() == 1) {
        out.at(y, x) = img.at(y, x, 0);
      } else {
        out.at(y, x) = 0.2126 * img.at(y, x, 0) + 0.7152 * img.at(y, x, 1) + 0.0722 * img.at(y, x, 2);
      }
    }
  }
  return out;
}

double tenengrad(const GrayImage& img) {
  check_tenengrad_input(img);
  std::vector<double> rows(img.height, 0.0);
  #pragma omp parallel for schedule(static)
  for (int y = 1; y < img.height - 1; ++y) rows[y] = sobel_row_energy(img, y);
  // Row partials are summed in order so the result matches serial::tenengrad bit for bit.
  const double total = std::accumulate(rows.begin(), rows.end(), 0.0);
  return total / (static_cast<double>(img.height - 2) * (img.width - 2));
}

double exposure_stats(const GrayImage& img) {
  if (img.empty()) throw InvalidArgument("exposure_stats on empty image");
  double acc = 0.0;
  #pragma omp parallel for reduction(+ : acc) schedule(static)
  for (std::size_t i = 0; i < img.size(); ++i) acc += img.data[i];
  return acc / static_cast<double>(img.size());
}

SaturationStats saturation_stats(const ImageTensor& img) {
  if (img.channels() != 3) throw InvalidArgument("saturation_stats requires a 3-channel image");
  double sum = 0.0;
  double sum_sq = 0.0;
  #pragma omp parallel for reduction(+ : sum, sum_sq) schedule(static)
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double r = img.at(y, x, 0), g = img.at(y, x, 1), b = img.at(y, x, 2);
      const double mx = std::max({r, g, b});
      const double mn = std::min({r, g, b});
      const double s = mx > 0.0 ? (mx - mn) / mx : 0.0;
      sum += s;
      sum_sq += s * s;
    }
  }
  const double n = static_cast<double>(img.pixel_count());
  const double mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - mean * mean);
  return {mean, std::sqrt(var)};
}

std::vector<std::uint16_t> quantize_levels(const GrayImage& img, int levels) {
  std::vector<std::uint16_t> q(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double v = std::clamp(img.data[i], 0.0, 1.0);
    q[i] = static_cast<std::uint16_t>(std::min(levels - 1, static_cast<int>(std::floor(v * levels))));
  }
  return q;
}

std::vector<std::uint64_t> glcm_counts(const GrayImage& img, int levels, std::span<const GlcmOffset> offsets) {
  check_glcm_input(img, levels, offsets);
  const auto q = quantize_levels(img, levels);
  const std::size_t cells = static_cast<std::size_t>(levels) * levels;
  const int nthreads = max_threads();
  std::vector<std::uint64_t> local(cells * nthreads, 0);

  #pragma omp parallel
  {
    std::uint64_t* mine = local.data() + cells * thread_index();
    #pragma omp for schedule(static)
    for (int y = 0; y < img.height; ++y) {
      for (const auto& o : offsets) accumulate_pairs(q, img.height, img.width, levels, o, y, y + 1, mine);
    }
  }

  std::vector<std::uint64_t> counts(cells, 0);
  for (int t = 0; t < nthreads; ++t) {
    for (std::size_t i = 0; i < cells; ++i) counts[i] += local[cells * t + i];
  }
  return counts;
}

TextureFeatures texture_from_counts(std::span<const std::uint64_t> counts, int levels) {
  const std::uint64_t total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  if (total == 0) throw InvalidArgument("co-occurrence matrix is empty");
  TextureFeatures f;
  const double inv = 1.0 / static_cast<double>(total);
  for (int i = 0; i < levels; ++i) {
    for (int j = 0; j < levels; ++j) {
      const std::uint64_t c = counts[static_cast<std::size_t>(i) * levels + j];
      if (c == 0) continue;
      const double p = static_cast<double>(c) * inv;
      const double d = static_cast<double>(i - j);
      f.contrast += p * d * d;
      f.energy += p * p;
      f.homogeneity += p / (1.0 + std::abs(d));
      f.entropy -= p * std::log(p);
    }
  }
  return f;
}

TextureFeatures glcm_features(const GrayImage& img, int levels, std::span<const GlcmOffset> offsets) {
  return texture_from_counts(glcm_counts(img, levels, offsets), levels);
}

std::map<std::string, double> measure(const ImageTensor& img, const QualityOptions& options) {
  const GrayImage gray = to_grayscale(img);
  std::map<std::string, double> m;
  m[kAspectRatio] = static_cast<double>(std::max(img.height(), img.width())) / std::min(img.height(), img.width());
  m[kMeanSaturation] = img.channels() == 3 ? saturation_stats(img).mean : 0.0;

  const auto measure_gray = [&](const GrayImage& g, double& sharp, double& lum, TextureFeatures& tex) {
    sharp = (g.height >= 3 && g.width >= 3) ? tenengrad(g) : 0.0;
    lum = exposure_stats(g);
    tex = glcm_features(g, options.glcm_levels, options.glcm_offsets);
  };

  double sharp = 0.0, lum = 0.0;
  TextureFeatures tex;
  if (options.tile_size <= 0 || (options.tile_size >= img.height() && options.tile_size >= img.width())) {
    measure_gray(gray, sharp, lum, tex);
  } else {
    const auto ys = tile_spans(gray.height, options.tile_size);
    const auto xs = tile_spans(gray.width, options.tile_size);
    double n = 0.0;
    for (const auto& [y0, y1] : ys) {
      for (const auto& [x0, x1] : xs) {
        double s = 0.0, l = 0.0;
        TextureFeatures t;
        measure_gray(crop_gray(gray, y0, y1, x0, x1), s, l, t);
        sharp += s;
        lum += l;
        tex.contrast += t.contrast;
        tex.energy += t.energy;
        tex.homogeneity += t.homogeneity;
        tex.entropy += t.entropy;
        n += 1.0;
      }
    }
    sharp /= n;
    lum /= n;
    tex.contrast /= n;
    tex.energy /= n;
    tex.homogeneity /= n;
    tex.entropy /= n;
  }

  m[kTenengrad] = sharp;
  m[kMeanLuminance] = lum;
  m[kGlcmContrast] = tex.contrast;
  m[kGlcmEnergy] = tex.energy;
  m[kGlcmHomogeneity] = tex.homogeneity;
  m[kGlcmEntropy] = tex.entropy;
  return m;
}

QualityVerdict judge(const std::map<std::string, double>& measurements, const QualityThresholds& thresholds) {
  thresholds.validate();
  const auto get = [&](const char* key) {
    const auto it = measurements.find(key);
    if (it == measurements.end()) throw InvalidArgument(std::string("missing measurement: ") + key);
    return it->second;
  };

  QualityVerdict v;
  v.measurements = measurements;
  if (get(kAspectRatio) > thresholds.max_aspect_ratio) v.failed_checks.emplace_back(kCheckAspectRatio);
  if (!thresholds.luminance_range.contains(get(kMeanLuminance))) v.failed_checks.emplace_back(kCheckExposure);
  if (!thresholds.saturation_range.contains(get(kMeanSaturation))) v.failed_checks.emplace_back(kCheckSaturation);
  if (!(get(kTenengrad) >= thresholds.min_sharpness)) v.failed_checks.emplace_back(kCheckSharpness);
  const auto& tb = thresholds.texture_bounds;
  if (!tb.contrast.contains(get(kGlcmContrast)) || !tb.energy.contains(get(kGlcmEnergy)) ||
      !tb.homogeneity.contains(get(kGlcmHomogeneity)) || !tb.entropy.contains(get(kGlcmEntropy))) {
    v.failed_checks.emplace_back(kCheckTexture);
  }
  v.passed = v.failed_checks.empty();
  return v;
}

QualityVerdict assess_quality(const ImageTensor& img, const QualityThresholds& thresholds,
                              const QualityOptions& options) {
  thresholds.validate();
  return judge(measure(img, options), thresholds);
}

namespace serial {

double tenengrad(const GrayImage& img) {
  check_tenengrad_input(img);
  double total = 0.0;
  for (int y = 1; y < img.height - 1; ++y) total += sobel_row_energy(img, y);
  return total / (static_cast<double>(img.height - 2) * (img.width - 2));
}

std::vector<std::uint64_t> glcm_counts(const GrayImage& img, int levels, std::span<const GlcmOffset> offsets) {
  check_glcm_input(img, levels, offsets);
  const auto q = quantize_levels(img, levels);
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(levels) * levels, 0);
  for (const auto& o : offsets) accumulate_pairs(q, img.height, img.width, levels, o, 0, img.height, counts.data());
  return counts;
}

}  // namespace serial

}  // namespace uhredit::quality

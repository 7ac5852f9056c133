// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "uhredit/image.hpp"

namespace uhredit::curation {

/// Per-pixel displacement (in pixels of the grid it was computed on).
struct FlowField {
  int height = 0;
  int width = 0;
  std::vector<float> u;
  std::vector<float> v;

  FlowField() = default;
  FlowField(int h, int w)
      : height(h), width(w), u(static_cast<std::size_t>(h) * w, 0.0f), v(static_cast<std::size_t>(h) * w, 0.0f) {}
};

struct FlowOptions {
  int pyramid_levels = 5;
  int window = 15;
  int iterations = 6;
  /// Windows whose structure tensor has a smaller minimum eigenvalue (per
  /// pixel, unit-interval intensities) are treated as textureless.
  double min_eigenvalue = 1e-7;
};

/// Dense pyramidal Lucas-Kanade: displacement d(x) such that b(x + d) ~ a(x).
FlowField optical_flow(const GrayImage& a, const GrayImage& b, const FlowOptions& options = {});

inline FlowField optical_flow(const GrayImage& a, const GrayImage& b, int pyramid_levels, int window) {
  FlowOptions o;
  o.pyramid_levels = pyramid_levels;
  o.window = window;
  return optical_flow(a, b, o);
}

/// Mean per-pixel magnitude sqrt(u^2 + v^2).
double motion_score(const FlowField& flow);

// "FLO1" files: magic, u32 LE height, u32 LE width, u-plane then v-plane as f32 LE.
FlowField read_flo1(const std::filesystem::path& path);
void write_flo1(const std::filesystem::path& path, const FlowField& flow);

struct MotionOptions {
  FlowOptions flow;
  /// Frames are area-downscaled so their longer side is at most this.
  int max_side = 1024;
  /// Average a->b and b->a magnitudes (order-symmetric scores).
  bool bidirectional = true;
};

/// Produces a motion score in native-resolution pixels for a frame pair.
class MotionEstimator {
 public:
  virtual ~MotionEstimator() = default;
  virtual double motion(const ImageTensor& a, const ImageTensor& b, std::string_view key_a,
                        std::string_view key_b) const = 0;
  virtual std::string identity() const = 0;
  virtual bool single_flight() const { return false; }
};

class LucasKanadeMotion final : public MotionEstimator {
 public:
  explicit LucasKanadeMotion(MotionOptions options = {}) : options_(options) {}
  double motion(const ImageTensor& a, const ImageTensor& b, std::string_view = {},
                std::string_view = {}) const override;
  std::string identity() const override { return "builtin:pyramidal-lk"; }

 private:
  MotionOptions options_;
};

/// Reads precomputed fields from `<dir>/<key_a>_<key_b>.flo` (native pixels).
class DirectoryMotion final : public MotionEstimator {
 public:
  explicit DirectoryMotion(std::filesystem::path dir);
  double motion(const ImageTensor& a, const ImageTensor& b, std::string_view key_a,
                std::string_view key_b) const override;
  std::string identity() const override { return "dir:" + dir_.string(); }

 private:
  std::filesystem::path dir_;
};

std::shared_ptr<MotionEstimator> make_motion_estimator(const std::string& spec, const MotionOptions& options = {});

namespace serial {
FlowField optical_flow(const GrayImage& a, const GrayImage& b, const FlowOptions& options = {});
}

}  // namespace uhredit::curation

// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "uhredit/curation/embedding.hpp"
#include "uhredit/curation/flow.hpp"
#include "uhredit/image.hpp"

namespace uhredit::curation {

/// Ordered frames, either held in memory or loaded from files on access.
class FrameSequence {
 public:
  explicit FrameSequence(std::vector<ImageTensor> frames, std::vector<double> timestamps = {});
  explicit FrameSequence(std::vector<std::filesystem::path> files);

  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }
  /// Loads (or returns) frame `i`; throws InvalidArgument if its size differs from frame 0.
  ImageTensor frame(std::size_t i) const;
  /// Stable content key for frame `i` (file digest or pixel digest).
  std::string key(std::size_t i) const;
  const std::vector<double>& timestamps() const { return timestamps_; }
  const std::vector<std::filesystem::path>& files() const { return files_; }

 private:
  std::size_t count_ = 0;
  std::vector<ImageTensor> frames_;
  std::vector<std::filesystem::path> files_;
  std::vector<double> timestamps_;
  int height_ = 0;
  int width_ = 0;
};

/// Half-open frame range [start, end).
struct ClipBoundary {
  std::size_t start = 0;
  std::size_t end = 0;
  bool operator==(const ClipBoundary&) const = default;
};

inline constexpr int kHistogramBins = 32;

/// Per-channel normalized 32-bin histograms (1 or 3 channels).
std::vector<std::array<double, kHistogramBins>> channel_histograms(const ImageTensor& img);

/// Mean over channels of the L1 distance between normalized histograms (in [0, 2]).
double histogram_distance(const std::vector<std::array<double, kHistogramBins>>& a,
                          const std::vector<std::array<double, kHistogramBins>>& b);

/// Cuts where consecutive-frame histogram distance exceeds `threshold`; clips
/// shorter than `min_clip_len` are merged into their predecessor (the first
/// clip, having none, merges into its successor).
std::vector<ClipBoundary> detect_scenes(const FrameSequence& seq, double threshold, std::size_t min_clip_len);

struct PairThresholds {
  double sim_high = 0.985;
  double sim_low = 0.80;
  double motion_low = 0.5;
  double motion_high = 40.0;

  void validate() const;
};

enum class PairVerdict { keep, drop_similar, drop_misaligned, scoring_error };

const char* to_string(PairVerdict v);

struct PairScore {
  double semantic_similarity = 0.0;
  double motion_score = 0.0;
  PairVerdict verdict = PairVerdict::keep;
  std::optional<std::string> error;
};

/// The keep/drop rule on already-computed scores.
PairVerdict classify_pair(double similarity, double motion, const PairThresholds& thresholds);

PairScore score_pair(const ImageTensor& a, const ImageTensor& b, const EmbeddingProvider& embeddings,
                     const MotionEstimator& motion, const PairThresholds& thresholds, const std::string& key_a = {},
                     const std::string& key_b = {});

struct PairMiningOptions {
  double scene_threshold = 0.6;
  std::size_t min_clip_len = 5;
  /// Frames sampled every `frame_stride` within a clip.
  std::size_t frame_stride = 1;
  /// Candidate pairs span at most this many sampled frames.
  std::size_t max_gap = 4;
  PairThresholds thresholds;
  /// Optional per-frame gate run before pairing (e.g. the quality filter).
  std::function<bool(const ImageTensor&)> frame_filter;
  int workers = 0;
};

struct CandidatePair {
  std::size_t first = 0;
  std::size_t second = 0;
  std::size_t clip = 0;
  PairScore score;
};

/// Scene segmentation, candidate enumeration and scoring; returns every
/// candidate with its verdict.
std::vector<CandidatePair> mine_pairs(const FrameSequence& seq, const EmbeddingProvider& embeddings,
                                      const MotionEstimator& motion, const PairMiningOptions& options);

}  // namespace uhredit::curation

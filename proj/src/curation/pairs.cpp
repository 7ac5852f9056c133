// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#include "uhredit/curation/pairs.hpp"

#include <algorithm>
#include <cmath>

#include "uhredit/digest.hpp"
#include "uhredit/error.hpp"
#include "uhredit/parallel.hpp"

namespace uhredit::curation {

FrameSequence::FrameSequence(std::vector<ImageTensor> frames, std::vector<double> timestamps)
    : count_(frames.size()), frames_(std::move(frames)), timestamps_(std::move(timestamps)) {
  if (frames_.empty()) throw InvalidArgument("frame sequence is empty");
  if (!timestamps_.empty() && timestamps_.size() != frames_.size()) {
    throw InvalidArgument("timestamp count does not match frame count");
  }
  height_ = frames_.front().height();
  width_ = frames_.front().width();
  for (const auto& f : frames_) {
    if (f.height() != height_ || f.width() != width_) throw InvalidArgument("frames must share dimensions");
  }
}

FrameSequence::FrameSequence(std::vector<std::filesystem::path> files)
    : count_(files.size()), files_(std::move(files)) {
  if (files_.empty()) throw InvalidArgument("frame sequence is empty");
  const ImageTensor first = read_image(files_.front());
  height_ = first.height();
  width_ = first.width();
}

ImageTensor FrameSequence::frame(std::size_t i) const {
  if (i >= count_) throw InvalidArgument("frame index out of range");
  if (!frames_.empty()) return frames_[i];
  ImageTensor f = read_image(files_[i]);
  if (f.height() != height_ || f.width() != width_) {
    throw InvalidArgument("frame " + files_[i].string() + " differs in size from the first frame");
  }
  return f;
}

std::string FrameSequence::key(std::size_t i) const {
  if (i >= count_) throw InvalidArgument("frame index out of range");
  if (!frames_.empty()) return hex_digest(frames_[i].bytes());
  return hex_digest(std::span<const std::uint8_t>(read_file_bytes(files_[i])));
}

std::vector<std::array<double, kHistogramBins>> channel_histograms(const ImageTensor& img) {
  std::vector<std::array<double, kHistogramBins>> hist(img.channels());
  for (auto& h : hist) h.fill(0.0);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < img.channels(); ++c) {
        const int bin = std::min(kHistogramBins - 1, static_cast<int>(img.at(y, x, c) * kHistogramBins));
        hist[c][bin] += 1.0;
      }
    }
  }
  const double n = static_cast<double>(img.pixel_count());
  for (auto& h : hist)
    for (double& v : h) v /= n;
  return hist;
}

double histogram_distance(const std::vector<std::array<double, kHistogramBins>>& a,
                          const std::vector<std::array<double, kHistogramBins>>& b) {
  if (a.size() != b.size() || a.empty()) throw InvalidArgument("histogram channel counts differ");
  double total = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    for (int k = 0; k < kHistogramBins; ++k) total += std::abs(a[c][k] - b[c][k]);
  }
  return total / static_cast<double>(a.size());
}

std::vector<ClipBoundary> detect_scenes(const FrameSequence& seq, double threshold, std::size_t min_clip_len) {
  if (seq.empty()) throw InvalidArgument("detect_scenes on empty sequence");
  std::vector<std::vector<std::array<double, kHistogramBins>>> hist(seq.size());
  std::exception_ptr failure;
  #pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < seq.size(); ++i) {
    try {
      hist[i] = channel_histograms(seq.frame(i));
    } catch (...) {
      #pragma omp critical(uhredit_scene_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<ClipBoundary> clips;
  std::size_t start = 0;
  for (std::size_t i = 1; i < seq.size(); ++i) {
    if (histogram_distance(hist[i - 1], hist[i]) > threshold) {
      clips.push_back({start, i});
      start = i;
    }
  }
  clips.push_back({start, seq.size()});

  std::vector<ClipBoundary> merged;
  for (const auto& c : clips) {
    if (!merged.empty() && c.end - c.start < min_clip_len) {
      merged.back().end = c.end;
    } else {
      merged.push_back(c);
    }
  }
  if (merged.size() > 1 && merged.front().end - merged.front().start < min_clip_len) {
    merged[1].start = merged[0].start;
    merged.erase(merged.begin());
  }
  return merged;
}

void PairThresholds::validate() const {
  if (!(sim_low <= sim_high)) throw InvalidArgument("pair thresholds: sim_low must be <= sim_high");
  if (!(motion_low <= motion_high)) throw InvalidArgument("pair thresholds: motion_low must be <= motion_high");
}

const char* to_string(PairVerdict v) {
  switch (v) {
    case PairVerdict::keep: return "keep";
    case PairVerdict::drop_similar: return "drop_similar";
    case PairVerdict::drop_misaligned: return "drop_misaligned";
    case PairVerdict::scoring_error: return "scoring_error";
  }
  return "unknown";
}

PairVerdict classify_pair(double similarity, double motion, const PairThresholds& t) {
  if (similarity >= t.sim_high && motion <= t.motion_low) return PairVerdict::drop_similar;
  if (motion >= t.motion_high && similarity <= t.sim_low) return PairVerdict::drop_misaligned;
  return PairVerdict::keep;
}

PairScore score_pair(const ImageTensor& a, const ImageTensor& b, const EmbeddingProvider& embeddings,
                     const MotionEstimator& motion, const PairThresholds& thresholds, const std::string& key_a,
                     const std::string& key_b) {
  thresholds.validate();
  if (a.height() != b.height() || a.width() != b.width()) throw InvalidArgument("score_pair: dimensions differ");
  PairScore s;
  try {
    s.semantic_similarity = semantic_similarity(embeddings.embed(a, key_a), embeddings.embed(b, key_b));
    s.motion_score = motion.motion(a, b, key_a, key_b);
    s.verdict = classify_pair(s.semantic_similarity, s.motion_score, thresholds);
  } catch (const Error& e) {
    s.verdict = PairVerdict::scoring_error;
    s.error = e.what();
  }
  return s;
}

std::vector<CandidatePair> mine_pairs(const FrameSequence& seq, const EmbeddingProvider& embeddings,
                                      const MotionEstimator& motion, const PairMiningOptions& options) {
  options.thresholds.validate();
  if (options.frame_stride == 0 || options.max_gap == 0) throw InvalidArgument("frame_stride and max_gap must be >= 1");
  const auto clips = detect_scenes(seq, options.scene_threshold, options.min_clip_len);

  std::vector<CandidatePair> candidates;
  for (std::size_t c = 0; c < clips.size(); ++c) {
    std::vector<std::size_t> sampled;
    for (std::size_t i = clips[c].start; i < clips[c].end; i += options.frame_stride) {
      if (options.frame_filter && !options.frame_filter(seq.frame(i))) continue;
      sampled.push_back(i);
    }
    for (std::size_t p = 0; p < sampled.size(); ++p) {
      for (std::size_t q = p + 1; q < sampled.size() && q - p <= options.max_gap; ++q) {
        candidates.push_back({sampled[p], sampled[q], c, {}});
      }
    }
  }

  const bool serial_only = embeddings.single_flight() || motion.single_flight();
  const int workers = serial_only ? 1 : resolve_workers(options.workers);
  #pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    auto& cand = candidates[k];
    try {
      cand.score = score_pair(seq.frame(cand.first), seq.frame(cand.second), embeddings, motion, options.thresholds,
                              seq.key(cand.first), seq.key(cand.second));
    } catch (const Error& e) {
      cand.score.verdict = PairVerdict::scoring_error;
      cand.score.error = e.what();
    }
  }
  return candidates;
}

}  // namespace uhredit::curation

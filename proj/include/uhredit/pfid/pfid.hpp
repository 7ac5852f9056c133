// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "uhredit/curation/embedding.hpp"
#include "uhredit/image.hpp"

namespace uhredit::pfid {

enum class Sampling { raster, random };

struct PatchConfig {
  int patch_size = 512;
  int stride = 512;
  int max_patches_per_image = 64;
  Sampling sampling = Sampling::raster;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PatchAnchor {
  int y = 0;
  int x = 0;
  bool operator==(const PatchAnchor&) const = default;
};

/// Top-left anchors on the stride grid, in raster order. Raster mode keeps
/// the first max_patches_per_image; random mode draws that many without
/// replacement from a generator seeded by (cfg.seed, image_index).
std::vector<PatchAnchor> patch_anchors(int height, int width, const PatchConfig& cfg, std::uint64_t image_index = 0);

std::vector<ImageTensor> extract_patches(const ImageTensor& img, const PatchConfig& cfg, std::uint64_t image_index = 0);

struct GaussianStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;  // unbiased, symmetrized
  std::size_t count = 0;

  std::size_t dimension() const { return static_cast<std::size_t>(mean.size()); }
};

/// Streaming mean / co-moment accumulator with an exact pairwise merge.
class MomentAccumulator {
 public:
  explicit MomentAccumulator(std::size_t dimension = 0);

  void add(std::span<const double> x);
  void add(std::span<const float> x);
  void merge(const MomentAccumulator& other);

  std::size_t count() const { return n_; }
  std::size_t dimension() const { return static_cast<std::size_t>(mean_.size()); }
  GaussianStats stats() const;

 private:
  void add_vector(const Eigen::VectorXd& x);

  std::size_t n_ = 0;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd comoment_;  // sum (x - mean)(x - mean)^T
};

GaussianStats gaussian_stats(const std::vector<std::vector<double>>& features);
GaussianStats gaussian_stats(const std::vector<curation::Embedding>& features);

/// V diag(sqrt(max(lambda, 0))) V^T. Throws on asymmetry above 1e-8 (relative
/// to the largest entry) or eigenvalues below -1e-10 (likewise relative).
Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& m);

/// ||mu1 - mu2||^2 + Tr(S1 + S2 - 2 (S1^1/2 S2 S1^1/2)^1/2), clipped at 0.
/// The trace term is averaged over both argument orders, so the result is
/// exactly symmetric.
double frechet_distance(const GaussianStats& a, const GaussianStats& b);

struct PfidResult {
  double score = 0.0;
  std::size_t real_patches = 0;
  std::size_t generated_patches = 0;
  std::size_t dimension = 0;
  std::string provider;
};

/// Patch features for a set of images; the provider key of each patch is
/// "<image digest>_<y>_<x>".
std::vector<curation::Embedding> patch_features(const std::vector<ImageTensor>& images, const PatchConfig& cfg,
                                                const curation::EmbeddingProvider& provider);

PfidResult pfid(const std::vector<ImageTensor>& real, const std::vector<ImageTensor>& generated,
                const curation::EmbeddingProvider& provider, const PatchConfig& cfg);

/// pfid on precomputed feature clouds.
PfidResult pfid_from_features(const std::vector<curation::Embedding>& real,
                              const std::vector<curation::Embedding>& generated);

/// PNG/JPEG files of a directory, sorted by file name.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

}  // namespace uhredit::pfid

// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#include "uhredit/pfid/pfid.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <exception>
#include <iterator>
#include <random>

#include "uhredit/digest.hpp"
#include "uhredit/error.hpp"

namespace uhredit::pfid {

namespace {

constexpr double kSymmetryTolerance = 1e-8;
constexpr double kNegativeEigenTolerance = 1e-10;

std::string lower_extension(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

}  // namespace

void PatchConfig::validate() const {
  if (patch_size < 1) throw InvalidArgument("patch_size must be positive");
  if (stride < 1) throw InvalidArgument("stride must be >= 1");
  if (max_patches_per_image < 1) throw InvalidArgument("max_patches_per_image must be positive");
}

std::vector<PatchAnchor> patch_anchors(int height, int width, const PatchConfig& cfg, std::uint64_t image_index) {
  cfg.validate();
  if (cfg.patch_size > std::min(height, width)) throw InvalidArgument("patch larger than image");
  std::vector<PatchAnchor> grid;
  for (int y = 0; y + cfg.patch_size <= height; y += cfg.stride)
    for (int x = 0; x + cfg.patch_size <= width; x += cfg.stride) grid.push_back({y, x});

  const auto cap = static_cast<std::size_t>(cfg.max_patches_per_image);
  if (grid.size() <= cap) return grid;
  if (cfg.sampling == Sampling::raster) {
    grid.resize(cap);
    return grid;
  }

  std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                    static_cast<std::uint32_t>(image_index), static_cast<std::uint32_t>(image_index >> 32)};
  std::mt19937_64 rng(seq);
  std::vector<std::size_t> order(grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = 0; i < cap; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  order.resize(cap);
  std::sort(order.begin(), order.end());
  std::vector<PatchAnchor> out;
  out.reserve(cap);
  for (std::size_t i : order) out.push_back(grid[i]);
  return out;
}

std::vector<ImageTensor> extract_patches(const ImageTensor& img, const PatchConfig& cfg, std::uint64_t image_index) {
  std::vector<ImageTensor> patches;
  for (const auto& a : patch_anchors(img.height(), img.width(), cfg, image_index)) {
    patches.push_back(img.crop(a.y, a.x, cfg.patch_size, cfg.patch_size));
  }
  return patches;
}

MomentAccumulator::MomentAccumulator(std::size_t dimension)
    : mean_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dimension))),
      comoment_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dimension), static_cast<Eigen::Index>(dimension))) {}

void MomentAccumulator::add_vector(const Eigen::VectorXd& x) {
  if (x.size() != mean_.size()) throw InvalidArgument("feature dimension mismatch");
  ++n_;
  const Eigen::VectorXd delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  comoment_.noalias() += delta * (x - mean_).transpose();
}

void MomentAccumulator::add(std::span<const double> x) {
  add_vector(Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())).eval());
}

void MomentAccumulator::add(std::span<const float> x) {
  add_vector(Eigen::Map<const Eigen::VectorXf>(x.data(), static_cast<Eigen::Index>(x.size())).cast<double>().eval());
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
  if (other.n_ == 0) return;
  if (other.dimension() != dimension()) throw InvalidArgument("feature dimension mismatch");
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_), nb = static_cast<double>(other.n_), n = na + nb;
  const Eigen::VectorXd delta = other.mean_ - mean_;
  mean_ += delta * (nb / n);
  comoment_ += other.comoment_ + delta * delta.transpose() * (na * nb / n);
  n_ += other.n_;
}

GaussianStats MomentAccumulator::stats() const {
  if (n_ < 2) throw InvalidArgument("gaussian_stats needs at least 2 samples");
  GaussianStats s;
  s.mean = mean_;
  s.covariance = comoment_ / static_cast<double>(n_ - 1);
  s.covariance = (0.5 * (s.covariance + s.covariance.transpose())).eval();
  s.count = n_;
  return s;
}

namespace {

// Fixed-size blocks merged in index order: the result does not depend on
// the thread count.
template <typename Vec>
GaussianStats blocked_stats(const std::vector<Vec>& features) {
  if (features.size() < 2) throw InvalidArgument("gaussian_stats needs at least 2 samples");
  const std::size_t d = features.front().size();
  if (d == 0) throw InvalidArgument("features must be nonempty");
  for (const auto& f : features) {
    if (f.size() != d) throw InvalidArgument("feature dimension mismatch");
  }
  constexpr std::size_t kBlock = 256;
  const std::size_t blocks = (features.size() + kBlock - 1) / kBlock;
  std::vector<MomentAccumulator> partial(blocks, MomentAccumulator(d));
  #pragma omp parallel for schedule(static)
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t end = std::min(features.size(), (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) partial[b].add(std::span(features[i]));
  }
  MomentAccumulator total(d);
  for (const auto& p : partial) total.merge(p);
  return total.stats();
}

}  // namespace

GaussianStats gaussian_stats(const std::vector<std::vector<double>>& features) { return blocked_stats(features); }
GaussianStats gaussian_stats(const std::vector<curation::Embedding>& features) { return blocked_stats(features); }

Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0) throw InvalidArgument("matrix_sqrt_psd: need a nonempty square matrix");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale) {
    throw InvalidArgument("matrix_sqrt_psd: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (m + m.transpose()));
  if (eig.info() != Eigen::Success) throw InvalidArgument("matrix_sqrt_psd: eigendecomposition failed");
  Eigen::VectorXd lambda = eig.eigenvalues();
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda[i] < -kNegativeEigenTolerance * scale) throw InvalidArgument("matrix_sqrt_psd: matrix is not PSD");
    lambda[i] = std::sqrt(std::max(0.0, lambda[i]));
  }
  const auto& v = eig.eigenvectors();
  return v * lambda.asDiagonal() * v.transpose();
}

namespace {
double trace_sqrt_product(const Eigen::MatrixXd& s1, const Eigen::MatrixXd& s2) {
  const Eigen::MatrixXd r = matrix_sqrt_psd(s1);
  Eigen::MatrixXd inner = r * s2 * r;
  inner = (0.5 * (inner + inner.transpose())).eval();
  return matrix_sqrt_psd(inner).trace();
}
}  // namespace

double frechet_distance(const GaussianStats& a, const GaussianStats& b) {
  if (a.dimension() != b.dimension() || a.dimension() == 0) throw InvalidArgument("frechet_distance: dimension mismatch");
  const double mean_term = (a.mean - b.mean).squaredNorm();
  const double cross = 0.5 * (trace_sqrt_product(a.covariance, b.covariance) +
                              trace_sqrt_product(b.covariance, a.covariance));
  const double d2 = mean_term + a.covariance.trace() + b.covariance.trace() - 2.0 * cross;
  return std::max(0.0, d2);
}

std::vector<curation::Embedding> patch_features(const std::vector<ImageTensor>& images, const PatchConfig& cfg,
                                                const curation::EmbeddingProvider& provider) {
  cfg.validate();
  std::vector<std::vector<curation::Embedding>> slots(images.size());
  std::exception_ptr failure;
  const bool parallel = !provider.single_flight();
  #pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::size_t i = 0; i < images.size(); ++i) {
    try {
      const auto& img = images[i];
      const std::string digest = hex_digest(img.bytes());
      for (const auto& a : patch_anchors(img.height(), img.width(), cfg, i)) {
        const auto patch = img.crop(a.y, a.x, cfg.patch_size, cfg.patch_size);
        slots[i].push_back(provider.embed(patch, digest + "_" + std::to_string(a.y) + "_" + std::to_string(a.x)));
      }
    } catch (...) {
      #pragma omp critical(uhredit_pfid_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<curation::Embedding> out;
  for (auto& s : slots) std::move(s.begin(), s.end(), std::back_inserter(out));
  return out;
}

PfidResult pfid_from_features(const std::vector<curation::Embedding>& real,
                              const std::vector<curation::Embedding>& generated) {
  if (real.empty() || generated.empty()) throw InvalidArgument("pfid: insufficient patches");
  const std::size_t d = real.front().size();
  if (real.size() < d + 1 || generated.size() < d + 1) {
    throw InvalidArgument("pfid: insufficient patches (need at least feature dimension + 1 per side)");
  }
  PfidResult r;
  r.score = frechet_distance(gaussian_stats(real), gaussian_stats(generated));
  r.real_patches = real.size();
  r.generated_patches = generated.size();
  r.dimension = d;
  return r;
}

PfidResult pfid(const std::vector<ImageTensor>& real, const std::vector<ImageTensor>& generated,
                const curation::EmbeddingProvider& provider, const PatchConfig& cfg) {
  if (real.empty() || generated.empty()) throw InvalidArgument("pfid: both image sets must be nonempty");
  auto r = pfid_from_features(patch_features(real, cfg, provider), patch_features(generated, cfg, provider));
  r.provider = provider.identity();
  return r;
}

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = lower_extension(entry.path());
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace uhredit::pfid

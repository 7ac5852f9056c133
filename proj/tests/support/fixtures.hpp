// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <random>
#include <string>
#include <vector>

#include "uhredit/image.hpp"
#include "uhredit/numerics/tensor.hpp"
#include "uhredit/pipeline/config.hpp"

namespace uhredit::testing {

using Rng = std::mt19937_64;

std::vector<double> random_values(std::size_t n, Rng& rng, double lo = 0.0, double hi = 1.0);

GrayImage random_gray(int h, int w, Rng& rng);

/// Blurred noise plus a few sinusoids: smooth enough for gradient methods,
/// busy enough for every quality check. Values stay inside [0.1, 0.9].
GrayImage textured_gray(int h, int w, std::uint64_t seed);

/// Colored version of textured_gray with distinct per-channel content.
ImageTensor textured_rgb(int h, int w, std::uint64_t seed);

/// Window [y0, y0+h) x [x0, x0+w) of a gray image.
GrayImage crop_gray(const GrayImage& img, int y0, int x0, int h, int w);

ImageTensor gray_to_tensor(const GrayImage& g);

/// 8-bit RGB noise-textured PNG content, large enough to pass size checks.
ImageTensor noisy_rgb(int h, int w, std::uint64_t seed, double mean = 0.5, double spread = 0.35);

/// Copy of `img` with the square [y0, y0+size) x [x0, x0+size) recolored.
ImageTensor recolor_square(const ImageTensor& img, int y0, int x0, int size, float r, float g, float b);

numerics::Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double lo = -1.0, double hi = 1.0);

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

// Frame-pair fixtures for the pair keep/drop rule.
struct FramePair {
  ImageTensor a;
  ImageTensor b;
};
FramePair near_identical_pair();
FramePair misaligned_pair();
FramePair transition_pair();

/// Triplet corpus on disk with known defects. Records cycle through ten
/// slots: 0 blurred edit, 1 overexposed edit, 3 byte copy of record i-1,
/// 4 edited identical to input, everything else a clean local recolor.
struct PlantedCorpus {
  std::filesystem::path dir;
  std::filesystem::path manifest;
  pipeline::PipelineConfig config;
  std::set<std::string> blurred, overexposed, duplicates, unedited, clean;
  std::map<std::string, double> aesthetic;  // injected "laion_aesthetic" scores
};

PlantedCorpus make_planted_corpus(const std::string& name, std::size_t records, std::uint64_t seed = 1);

}  // namespace uhredit::testing

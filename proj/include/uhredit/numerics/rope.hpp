// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "uhredit/numerics/tensor.hpp"

namespace uhredit::numerics {

enum class RopeAxis { row, col };

/// Which exponent range produces theta_i = base^(-2i/d).
enum class RopeIndexing {
  one_based,   // i = 1..d/2, so theta_{d/2} = 1/base
  zero_based,  // i = 0..d/2-1, so theta_0 = 1
};

struct RopeConfig {
  int head_dim = 64;  // channels rotated along one axis; must be even
  double base = 10000.0;
  RopeAxis axis = RopeAxis::row;
  RopeIndexing indexing = RopeIndexing::one_based;

  void validate() const;
};

struct GridPosition {
  std::int64_t row = 0;
  std::int64_t col = 0;
};

/// N tokens of width d with their (row, col) grid coordinates.
struct TokenGrid {
  Matrix tokens;
  std::vector<GridPosition> positions;

  /// Dense rows x cols grid in raster order.
  static TokenGrid dense(std::size_t rows, std::size_t cols, std::size_t dim);
};

/// Per-pair rotation frequencies, length head_dim / 2, strictly decreasing.
std::vector<double> rope_frequencies(const RopeConfig& cfg);

/// sqrt(n_uhr / n_nhr), the per-axis position stretch between resolutions.
double token_scale(double n_uhr, double n_nhr);

/// NTK-style base rescaling b' = b * sqrt(n_uhr / n_nhr).
double rescale_rope_base(double base, double n_uhr, double n_nhr);

/// Rotates interleaved pairs (x[2k], x[2k+1]) of `pairs` by theta_k * position.
void rotate_pairs(std::span<double> pairs, std::span<const double> theta, double position);

/// One-axis RoPE over the full token width (head_dim == token width),
/// using the coordinate selected by cfg.axis.
Matrix apply_rope(const TokenGrid& grid, const RopeConfig& cfg);

/// Factorized 2D RoPE: the first head_dim channels rotate with the row
/// coordinate, the next head_dim with the column (token width = 2*head_dim).
Matrix apply_rope_2d(const TokenGrid& grid, const RopeConfig& cfg);

}  // namespace uhredit::numerics

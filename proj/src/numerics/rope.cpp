// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#include "uhredit/numerics/rope.hpp"

#include <cmath>

#include "uhredit/error.hpp"

namespace uhredit::numerics {

namespace {

void check_token_counts(double n_uhr, double n_nhr) {
  if (!(n_uhr > 0.0) || !(n_nhr > 0.0)) throw InvalidArgument("token counts must be positive");
  if (n_uhr < n_nhr) throw InvalidArgument("n_uhr must be >= n_nhr");
}

void check_grid(const TokenGrid& grid) {
  if (grid.positions.size() != grid.tokens.rows) throw InvalidArgument("one position per token is required");
  for (const auto& p : grid.positions) {
    if (p.row < 0 || p.col < 0) throw InvalidArgument("token positions must be nonnegative");
  }
}

}  // namespace

void RopeConfig::validate() const {
  if (head_dim <= 0 || head_dim % 2 != 0) throw InvalidArgument("rope head_dim must be positive and even");
  if (!(base > 0.0)) throw InvalidArgument("rope base must be positive");
}

TokenGrid TokenGrid::dense(std::size_t rows, std::size_t cols, std::size_t dim) {
  TokenGrid g;
  g.tokens = Matrix(rows * cols, dim);
  g.positions.reserve(rows * cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) g.positions.push_back({static_cast<std::int64_t>(r), static_cast<std::int64_t>(c)});
  return g;
}

std::vector<double> rope_frequencies(const RopeConfig& cfg) {
  cfg.validate();
  const int half = cfg.head_dim / 2;
  const int first = cfg.indexing == RopeIndexing::one_based ? 1 : 0;
  std::vector<double> theta(half);
  for (int k = 0; k < half; ++k) {
    theta[k] = std::pow(cfg.base, -2.0 * (k + first) / cfg.head_dim);
  }
  return theta;
}

double token_scale(double n_uhr, double n_nhr) {
  check_token_counts(n_uhr, n_nhr);
  return std::sqrt(n_uhr / n_nhr);
}

double rescale_rope_base(double base, double n_uhr, double n_nhr) {
  if (!(base > 0.0)) throw InvalidArgument("rope base must be positive");
  return base * token_scale(n_uhr, n_nhr);
}

void rotate_pairs(std::span<double> pairs, std::span<const double> theta, double position) {
  if (pairs.size() != 2 * theta.size()) throw InvalidArgument("rotate_pairs: width must be 2 * len(theta)");
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double angle = theta[k] * position;
    const double c = std::cos(angle), s = std::sin(angle);
    const double re = pairs[2 * k], im = pairs[2 * k + 1];
    pairs[2 * k] = re * c - im * s;
    pairs[2 * k + 1] = re * s + im * c;
  }
}

Matrix apply_rope(const TokenGrid& grid, const RopeConfig& cfg) {
  check_grid(grid);
  if (grid.tokens.cols != static_cast<std::size_t>(cfg.head_dim)) {
    throw InvalidArgument("apply_rope: token width must equal head_dim");
  }
  const auto theta = rope_frequencies(cfg);
  Matrix out = grid.tokens;
  #pragma omp parallel for schedule(static)
  for (std::size_t n = 0; n < out.rows; ++n) {
    const auto& p = grid.positions[n];
    rotate_pairs(out.row(n), theta, static_cast<double>(cfg.axis == RopeAxis::row ? p.row : p.col));
  }
  return out;
}

Matrix apply_rope_2d(const TokenGrid& grid, const RopeConfig& cfg) {
  check_grid(grid);
  const std::size_t d = static_cast<std::size_t>(cfg.head_dim);
  if (grid.tokens.cols != 2 * d) throw InvalidArgument("apply_rope_2d: token width must be 2 * head_dim");
  const auto theta = rope_frequencies(cfg);
  Matrix out = grid.tokens;
  #pragma omp parallel for schedule(static)
  for (std::size_t n = 0; n < out.rows; ++n) {
    auto row = out.row(n);
    rotate_pairs(row.subspan(0, d), theta, static_cast<double>(grid.positions[n].row));
    rotate_pairs(row.subspan(d, d), theta, static_cast<double>(grid.positions[n].col));
  }
  return out;
}

}  // namespace uhredit::numerics

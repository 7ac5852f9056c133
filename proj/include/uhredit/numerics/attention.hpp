// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <numbers>
#include <span>
#include <vector>

#include "uhredit/numerics/tensor.hpp"

namespace uhredit::numerics {

struct AttentionConfig {
  double n_uhr = 1.0;
  double n_nhr = 1.0;
  double temperature = 1.0;
  std::size_t key_dim = 64;
};

/// Resolution-aware temperature max(1, log_base sqrt(n_uhr / n_nhr)).
/// The clamp keeps the operator an identity (rather than a flattening) for
/// token ratios below base^2.
double attention_temperature(double n_uhr, double n_nhr, double log_base = std::numbers::e);

AttentionConfig make_attention_config(double n_uhr, double n_nhr, std::size_t key_dim,
                                      double log_base = std::numbers::e);

/// out = softmax(scale * logits), max-subtracted.
void scaled_softmax(std::span<const double> logits, double scale, std::span<double> out);

struct AttentionResult {
  Matrix output;   // N x d_v
  Matrix weights;  // N x M, row-stochastic
};

/// w'_{m,n} = softmax_n(tau * q_m . k_n / sqrt(d)); output = w' V.
AttentionResult scaled_attention(const Matrix& q, const Matrix& k, const Matrix& v, double tau);

/// Row entropies -sum w ln w (0 ln 0 := 0). Rows must be stochastic within 1e-6.
std::vector<double> attention_entropy(const Matrix& weights);

double row_entropy(std::span<const double> row);

namespace serial {
AttentionResult scaled_attention(const Matrix& q, const Matrix& k, const Matrix& v, double tau);
}

}  // namespace uhredit::numerics

// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "uhredit/numerics/tensor.hpp"

namespace uhredit::numerics {

enum class WeightGradient {
  stop_gradient,  // W is a constant in the backward pass
  full,           // differentiate through W, including its max normalizer
};

struct SpectralLossConfig {
  double alpha_min = 0.2;
  double alpha_max = 1.2;
  double gamma = 2.0;
  double lambda = 1.0;
  double eps_w = 1e-8;
  WeightGradient weight_gradient = WeightGradient::stop_gradient;

  void validate() const;
};

/// Channel-averaged |DFT(pred) - DFT(target)| under the orthonormal 2D DFT.
/// Inputs are H x W or C x H x W (any leading axes count as channels);
/// the result has shape {H, W}.
Tensor spectral_discrepancy(const Tensor& pred, const Tensor& target);

/// alpha_t = alpha_min + (alpha_max - alpha_min) (1 - t)^gamma.
double focus_intensity(double t, const SpectralLossConfig& cfg);

/// W = (dF + eps)^alpha / max (dF + eps)^alpha. The maximum maps to exactly 1.
Tensor frequency_weights(const Tensor& discrepancy, double alpha, double eps_w);

struct FrequencyLoss {
  double value = 0.0;
  Tensor gradient;     // d value / d pred, same shape as pred
  Tensor discrepancy;  // {H, W}
  Tensor weights;      // {H, W}
  double alpha = 0.0;
};

/// L_freq = mean(W * dF) and its analytic gradient with respect to `pred`.
/// d|z|/dz is taken as 0 at z = 0.
FrequencyLoss frequency_loss(const Tensor& pred, const Tensor& target, double t, const SpectralLossConfig& cfg);

/// mean(weights * dF) with caller-supplied weights, for checking the
/// stop-gradient policy by finite differences.
double weighted_spectral_loss(const Tensor& pred, const Tensor& target, const Tensor& weights);

}  // namespace uhredit::numerics

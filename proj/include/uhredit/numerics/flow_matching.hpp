// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "uhredit/numerics/spectral_loss.hpp"
#include "uhredit/numerics/tensor.hpp"

namespace uhredit::numerics {

enum class Reduction { mean, sum };

/// Which clean endpoint the noise path starts from.
enum class InterpolationEndpoint {
  target,  // z_t = (1 - t) y + t eps, consistent with supervising eps - y
  input,   // z_t = (1 - t) x + t eps, the literal reading with the input image
};

/// z_t = (1 - t) * clean + t * noise.
Tensor flow_interpolate(const Tensor& clean, const Tensor& noise, double t);

struct FlowSample {
  Tensor y;      // supervised target
  Tensor noise;  // eps
  Tensor x;      // input image; only read under InterpolationEndpoint::input
  double t = 0.0;
  Tensor z_t;

  static FlowSample make(Tensor y, Tensor noise, double t, InterpolationEndpoint endpoint = InterpolationEndpoint::target,
                         Tensor x = {});
};

struct FlowMatchingLoss {
  double value = 0.0;
  Tensor prediction;  // y_hat = eps - nu
};

/// ||nu - (eps - y)||^2 under the chosen reduction.
FlowMatchingLoss flow_matching_loss(const Tensor& velocity, const Tensor& noise, const Tensor& y,
                                    Reduction reduction = Reduction::mean);

struct TotalLoss {
  double value = 0.0;
  double flow_matching = 0.0;
  double frequency = 0.0;
};

/// L_FM + lambda * L_freq(eps - nu, y).
TotalLoss total_loss(const Tensor& velocity, const Tensor& noise, const Tensor& y, double t,
                     const SpectralLossConfig& cfg, Reduction reduction = Reduction::mean);

}  // namespace uhredit::numerics

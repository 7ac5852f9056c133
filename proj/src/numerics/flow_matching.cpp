// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#include "uhredit/numerics/flow_matching.hpp"

#include "uhredit/error.hpp"

namespace uhredit::numerics {

Tensor flow_interpolate(const Tensor& clean, const Tensor& noise, double t) {
  require_same_shape(clean, noise, "flow_interpolate");
  if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("flow_interpolate: t must lie in [0, 1]");
  Tensor z(clean.shape());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = (1.0 - t) * clean[i] + t * noise[i];
  return z;
}

FlowSample FlowSample::make(Tensor y, Tensor noise, double t, InterpolationEndpoint endpoint, Tensor x) {
  require_same_shape(y, noise, "FlowSample");
  FlowSample s;
  if (endpoint == InterpolationEndpoint::input) {
    require_same_shape(x, noise, "FlowSample");
    s.z_t = flow_interpolate(x, noise, t);
  } else {
    s.z_t = flow_interpolate(y, noise, t);
  }
  s.y = std::move(y);
  s.noise = std::move(noise);
  s.x = std::move(x);
  s.t = t;
  return s;
}

FlowMatchingLoss flow_matching_loss(const Tensor& velocity, const Tensor& noise, const Tensor& y, Reduction reduction) {
  require_same_shape(velocity, noise, "flow_matching_loss");
  require_same_shape(velocity, y, "flow_matching_loss");
  if (velocity.size() == 0) throw InvalidArgument("flow_matching_loss: empty tensor");
  FlowMatchingLoss r;
  r.prediction = Tensor(velocity.shape());
  double sum = 0.0;
  for (std::size_t i = 0; i < velocity.size(); ++i) {
    const double d = velocity[i] - (noise[i] - y[i]);
    sum += d * d;
    r.prediction[i] = noise[i] - velocity[i];
  }
  r.value = reduction == Reduction::mean ? sum / static_cast<double>(velocity.size()) : sum;
  return r;
}

TotalLoss total_loss(const Tensor& velocity, const Tensor& noise, const Tensor& y, double t,
                     const SpectralLossConfig& cfg, Reduction reduction) {
  const auto fm = flow_matching_loss(velocity, noise, y, reduction);
  TotalLoss r;
  r.flow_matching = fm.value;
  if (cfg.lambda != 0.0) r.frequency = frequency_loss(fm.prediction, y, t, cfg).value;
  r.value = r.flow_matching + cfg.lambda * r.frequency;
  return r;
}

}  // namespace uhredit::numerics

// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#include "uhredit/numerics/spectral_loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "uhredit/error.hpp"
#include "uhredit/numerics/dft.hpp"

namespace uhredit::numerics {

namespace {

void check_pair(const Tensor& pred, const Tensor& target, const char* what) {
  require_same_shape(pred, target, what);
  if (pred.rank() < 2 || pred.size() == 0) throw InvalidArgument(std::string(what) + ": need a nonempty H x W tensor");
  require_finite(pred, what);
  require_finite(target, what);
}

// Per-channel spectra of pred - target.
std::vector<std::vector<Complex>> difference_spectra(const Tensor& pred, const Tensor& target) {
  const std::size_t h = pred.height(), w = pred.width(), c = pred.planes(), hw = h * w;
  const Dft2d plan(h, w);
  std::vector<std::vector<Complex>> spectra(c, std::vector<Complex>(hw));
  for (std::size_t ch = 0; ch < c; ++ch) {
    auto& s = spectra[ch];
    for (std::size_t i = 0; i < hw; ++i) s[i] = pred[ch * hw + i] - target[ch * hw + i];
    plan.forward(s);
  }
  return spectra;
}

Tensor channel_mean_modulus(const std::vector<std::vector<Complex>>& spectra, std::size_t h, std::size_t w) {
  Tensor df({h, w});
  const double inv_c = 1.0 / static_cast<double>(spectra.size());
  for (const auto& s : spectra) {
    for (std::size_t i = 0; i < h * w; ++i) df[i] += std::abs(s[i]);
  }
  for (double& v : df.data()) v *= inv_c;
  return df;
}

double weighted_mean(const Tensor& weights, const Tensor& df) {
  double sum = 0.0;
  for (std::size_t i = 0; i < df.size(); ++i) sum += weights[i] * df[i];
  return sum / static_cast<double>(df.size());
}

}  // namespace

void SpectralLossConfig::validate() const {
  if (!(alpha_min >= 0.0) || !(alpha_max >= alpha_min)) throw InvalidArgument("need 0 <= alpha_min <= alpha_max");
  if (!(gamma > 0.0)) throw InvalidArgument("gamma must be positive");
  if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be nonnegative");
  if (!(eps_w > 0.0)) throw InvalidArgument("eps_w must be positive");
}

Tensor spectral_discrepancy(const Tensor& pred, const Tensor& target) {
  check_pair(pred, target, "spectral_discrepancy");
  return channel_mean_modulus(difference_spectra(pred, target), pred.height(), pred.width());
}

double focus_intensity(double t, const SpectralLossConfig& cfg) {
  cfg.validate();
  if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("t must lie in [0, 1]");
  // std::lerp is exact at both ends and monotone in its third argument.
  return std::lerp(cfg.alpha_min, cfg.alpha_max, std::pow(1.0 - t, cfg.gamma));
}

Tensor frequency_weights(const Tensor& discrepancy, double alpha, double eps_w) {
  if (discrepancy.size() == 0) throw InvalidArgument("frequency_weights: empty matrix");
  if (!(eps_w > 0.0)) throw InvalidArgument("frequency_weights: eps_w must be positive");
  Tensor w = discrepancy;
  for (double& v : w.data()) {
    if (!(v >= 0.0)) throw InvalidArgument("frequency_weights: discrepancy must be nonnegative");
    v = std::pow(v + eps_w, alpha);
  }
  const double mx = *std::max_element(w.data().begin(), w.data().end());
  for (double& v : w.data()) v /= mx;
  return w;
}

FrequencyLoss frequency_loss(const Tensor& pred, const Tensor& target, double t, const SpectralLossConfig& cfg) {
  check_pair(pred, target, "frequency_loss");
  const std::size_t h = pred.height(), w = pred.width(), hw = h * w, c = pred.planes();

  FrequencyLoss r;
  r.alpha = focus_intensity(t, cfg);
  auto spectra = difference_spectra(pred, target);
  r.discrepancy = channel_mean_modulus(spectra, h, w);
  r.weights = frequency_weights(r.discrepancy, r.alpha, cfg.eps_w);
  r.value = weighted_mean(r.weights, r.discrepancy);

  // g = dL/d(dF).
  const double inv_n = 1.0 / static_cast<double>(hw);
  std::vector<double> g(hw);
  for (std::size_t i = 0; i < hw; ++i) g[i] = r.weights[i] * inv_n;
  if (cfg.weight_gradient == WeightGradient::full && r.alpha != 0.0) {
    // W_i = P_i / P_k with P = (dF + eps)^alpha and k the argmax. Mirror bins
    // tied with k are identically equal to it, so charging k alone is exact.
    const auto& df = r.discrepancy;
    const std::size_t k = static_cast<std::size_t>(
        std::max_element(r.weights.data().begin(), r.weights.data().end()) - r.weights.data().begin());
    for (std::size_t i = 0; i < hw; ++i) g[i] += inv_n * r.alpha * r.weights[i] * df[i] / (df[i] + cfg.eps_w);
    g[k] -= r.value * r.alpha / (df[k] + cfg.eps_w);
  }

  // Through |D_c| into pred_c: grad_c = Re(IDFT(g / C * D_c / |D_c|)).
  r.gradient = Tensor(pred.shape());
  const Dft2d plan(h, w);
  const double inv_c = 1.0 / static_cast<double>(c);
  for (std::size_t ch = 0; ch < c; ++ch) {
    auto& s = spectra[ch];
    for (std::size_t i = 0; i < hw; ++i) {
      const double mag = std::abs(s[i]);
      s[i] = mag > 0.0 ? s[i] * (g[i] * inv_c / mag) : Complex{};
    }
    plan.inverse(s);
    for (std::size_t i = 0; i < hw; ++i) r.gradient[ch * hw + i] = s[i].real();
  }
  return r;
}

double weighted_spectral_loss(const Tensor& pred, const Tensor& target, const Tensor& weights) {
  const Tensor df = spectral_discrepancy(pred, target);
  if (!weights.same_shape(df)) throw InvalidArgument("weighted_spectral_loss: weights must be H x W");
  return weighted_mean(weights, df);
}

}  // namespace uhredit::numerics

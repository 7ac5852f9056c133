// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#include "uhredit/numerics/attention.hpp"

#include <algorithm>
#include <cmath>

#include "uhredit/error.hpp"

namespace uhredit::numerics {

namespace {

void check_attention_inputs(const Matrix& q, const Matrix& k, const Matrix& v, double tau) {
  if (q.cols != k.cols) throw InvalidArgument("attention: query and key widths differ");
  if (k.rows != v.rows) throw InvalidArgument("attention: key and value counts differ");
  if (q.rows == 0 || k.rows == 0 || q.cols == 0) throw InvalidArgument("attention: empty input");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidArgument("attention: tau must be positive and finite");
  for (const Matrix* m : {&q, &k, &v}) {
    for (double x : m->data) {
      if (!std::isfinite(x)) throw InvalidArgument("attention: non-finite input");
    }
  }
}

// One query row: logits, softmax, and the weighted value sum.
void attend_row(const Matrix& q, const Matrix& k, const Matrix& v, double scale, std::size_t m, Matrix& weights,
                Matrix& output) {
  auto w = weights.row(m);
  const auto qm = q.row(m);
  for (std::size_t n = 0; n < k.rows; ++n) {
    const auto kn = k.row(n);
    double dot = 0.0;
    for (std::size_t c = 0; c < q.cols; ++c) dot += qm[c] * kn[c];
    w[n] = dot;
  }
  scaled_softmax(w, scale, w);
  auto out = output.row(m);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t n = 0; n < v.rows; ++n) {
    const auto vn = v.row(n);
    for (std::size_t c = 0; c < v.cols; ++c) out[c] += w[n] * vn[c];
  }
}

template <bool Parallel>
AttentionResult attention_impl(const Matrix& q, const Matrix& k, const Matrix& v, double tau) {
  check_attention_inputs(q, k, v, tau);
  AttentionResult r{Matrix(q.rows, v.cols), Matrix(q.rows, k.rows)};
  const double scale = tau / std::sqrt(static_cast<double>(q.cols));
  #pragma omp parallel for schedule(static) if (Parallel)
  for (std::size_t m = 0; m < q.rows; ++m) attend_row(q, k, v, scale, m, r.weights, r.output);
  return r;
}

}  // namespace

double attention_temperature(double n_uhr, double n_nhr, double log_base) {
  if (!(n_uhr > 0.0) || !(n_nhr > 0.0)) throw InvalidArgument("token counts must be positive");
  if (n_uhr < n_nhr) throw InvalidArgument("n_uhr must be >= n_nhr");
  if (!(log_base > 1.0)) throw InvalidArgument("log base must exceed 1");
  const double tau = std::log(std::sqrt(n_uhr / n_nhr)) / std::log(log_base);
  return std::max(1.0, tau);
}

AttentionConfig make_attention_config(double n_uhr, double n_nhr, std::size_t key_dim, double log_base) {
  return {n_uhr, n_nhr, attention_temperature(n_uhr, n_nhr, log_base), key_dim};
}

void scaled_softmax(std::span<const double> logits, double scale, std::span<double> out) {
  if (logits.size() != out.size() || logits.empty()) throw InvalidArgument("softmax: size mismatch");
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(scale * (logits[i] - mx));
    sum += out[i];
  }
  const double inv = 1.0 / sum;
  for (double& x : out) x *= inv;
}

AttentionResult scaled_attention(const Matrix& q, const Matrix& k, const Matrix& v, double tau) {
  return attention_impl<true>(q, k, v, tau);
}

namespace serial {
AttentionResult scaled_attention(const Matrix& q, const Matrix& k, const Matrix& v, double tau) {
  return attention_impl<false>(q, k, v, tau);
}
}  // namespace serial

double row_entropy(std::span<const double> row) {
  double h = 0.0;
  for (double w : row) {
    if (w > 0.0) h -= w * std::log(w);
  }
  return h;
}

std::vector<double> attention_entropy(const Matrix& weights) {
  std::vector<double> h(weights.rows);
  for (std::size_t m = 0; m < weights.rows; ++m) {
    const auto row = weights.row(m);
    double sum = 0.0;
    for (double w : row) {
      if (!(w >= 0.0)) throw InvalidArgument("attention_entropy: negative weight");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-6) throw InvalidArgument("attention_entropy: row is not stochastic");
    h[m] = row_entropy(row);
  }
  return h;
}

}  // namespace uhredit::numerics

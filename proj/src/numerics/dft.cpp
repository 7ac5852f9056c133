// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#include "uhredit/numerics/dft.hpp"

#include <cmath>
#include <numbers>

#include "uhredit/error.hpp"

namespace uhredit::numerics {

namespace {

constexpr std::size_t kDirectLimit = 64;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 transform with a precomputed forward twiddle table.
class Radix2 {
 public:
  explicit Radix2(std::size_t n) : n_(n), twiddle_(n / 2), rev_(n) {
    for (std::size_t k = 0; k < n / 2; ++k) {
      twiddle_[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
    }
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
      rev_[i] = r;
    }
  }

  void run(std::span<Complex> a, bool inverse) const {
    for (std::size_t i = 0; i < n_; ++i) {
      if (i < rev_[i]) std::swap(a[i], a[rev_[i]]);
    }
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t step = n_ / len;
      for (std::size_t i = 0; i < n_; i += len) {
        for (std::size_t j = 0; j < half; ++j) {
          const Complex w = inverse ? std::conj(twiddle_[j * step]) : twiddle_[j * step];
          const Complex u = a[i + j];
          const Complex v = a[i + j + half] * w;
          a[i + j] = u + v;
          a[i + j + half] = u - v;
        }
      }
    }
  }

 private:
  std::size_t n_;
  std::vector<Complex> twiddle_;
  std::vector<std::size_t> rev_;
};

}  // namespace

struct Dft1d::Impl {
  enum class Kind { pow2, direct, bluestein } kind;
  std::unique_ptr<Radix2> radix;    // pow2 (length n) or bluestein (length m)
  std::vector<Complex> table;       // direct: exp(-2 pi i k / n)
  std::vector<Complex> chirp;       // bluestein: exp(-i pi k^2 / n)
  std::vector<Complex> kernel_fft;  // bluestein: FFT of the conjugate chirp
  std::size_t m = 0;
};

Dft1d::Dft1d(std::size_t n) : n_(n), impl_(std::make_unique<Impl>()) {
  if (n == 0) throw InvalidArgument("DFT length must be positive");
  if (is_pow2(n)) {
    impl_->kind = Impl::Kind::pow2;
    impl_->radix = std::make_unique<Radix2>(n);
  } else if (n <= kDirectLimit) {
    impl_->kind = Impl::Kind::direct;
    impl_->table.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      impl_->table[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
    }
  } else {
    impl_->kind = Impl::Kind::bluestein;
    std::size_t m = 1;
    while (m < 2 * n - 1) m <<= 1;
    impl_->m = m;
    impl_->radix = std::make_unique<Radix2>(m);
    impl_->chirp.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      // k^2 mod 2n keeps the angle argument small and exact.
      const std::size_t k2 = (k * k) % (2 * n);
      impl_->chirp[k] = std::polar(1.0, -std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n));
    }
    impl_->kernel_fft.assign(m, Complex{});
    impl_->kernel_fft[0] = std::conj(impl_->chirp[0]);
    for (std::size_t k = 1; k < n; ++k) {
      impl_->kernel_fft[k] = std::conj(impl_->chirp[k]);
      impl_->kernel_fft[m - k] = std::conj(impl_->chirp[k]);
    }
    impl_->radix->run(impl_->kernel_fft, false);
  }
}

Dft1d::~Dft1d() = default;
Dft1d::Dft1d(Dft1d&&) noexcept = default;
Dft1d& Dft1d::operator=(Dft1d&&) noexcept = default;

void Dft1d::forward(std::span<Complex> data) const {
  if (data.size() != n_) throw InvalidArgument("DFT input length mismatch");
  switch (impl_->kind) {
    case Impl::Kind::pow2:
      impl_->radix->run(data, false);
      return;
    case Impl::Kind::direct: {
      std::vector<Complex> out(n_);
      for (std::size_t k = 0; k < n_; ++k) {
        Complex acc{};
        for (std::size_t j = 0; j < n_; ++j) acc += data[j] * impl_->table[(j * k) % n_];
        out[k] = acc;
      }
      std::copy(out.begin(), out.end(), data.begin());
      return;
    }
    case Impl::Kind::bluestein: {
      const std::size_t m = impl_->m;
      std::vector<Complex> a(m, Complex{});
      for (std::size_t k = 0; k < n_; ++k) a[k] = data[k] * impl_->chirp[k];
      impl_->radix->run(a, false);
      for (std::size_t k = 0; k < m; ++k) a[k] *= impl_->kernel_fft[k];
      impl_->radix->run(a, true);
      const double inv_m = 1.0 / static_cast<double>(m);
      for (std::size_t k = 0; k < n_; ++k) data[k] = a[k] * inv_m * impl_->chirp[k];
      return;
    }
  }
}

void Dft1d::backward(std::span<Complex> data) const {
  for (auto& z : data) z = std::conj(z);
  forward(data);
  for (auto& z : data) z = std::conj(z);
}

Dft2d::Dft2d(std::size_t height, std::size_t width) : rows_(width), cols_(height) {}

void Dft2d::transform(std::span<Complex> plane, bool inverse, bool parallel) const {
  const std::size_t h = cols_.size(), w = rows_.size();
  if (plane.size() != h * w) throw InvalidArgument("DFT plane size mismatch");

  #pragma omp parallel for schedule(static) if (parallel)
  for (std::size_t y = 0; y < h; ++y) {
    auto row = plane.subspan(y * w, w);
    inverse ? rows_.backward(row) : rows_.forward(row);
  }

  #pragma omp parallel if (parallel)
  {
    std::vector<Complex> col(h);
    #pragma omp for schedule(static)
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t y = 0; y < h; ++y) col[y] = plane[y * w + x];
      inverse ? cols_.backward(col) : cols_.forward(col);
      for (std::size_t y = 0; y < h; ++y) plane[y * w + x] = col[y];
    }
  }

  const double norm = 1.0 / std::sqrt(static_cast<double>(h * w));
  for (auto& z : plane) z *= norm;
}

void Dft2d::forward(std::span<Complex> plane, bool parallel) const { transform(plane, false, parallel); }
void Dft2d::inverse(std::span<Complex> plane, bool parallel) const { transform(plane, true, parallel); }

namespace {
std::vector<Complex> real_dft2(std::span<const double> plane, std::size_t h, std::size_t w, bool parallel) {
  if (plane.size() != h * w) throw InvalidArgument("DFT plane size mismatch");
  std::vector<Complex> out(plane.begin(), plane.end());
  Dft2d(h, w).forward(out, parallel);
  return out;
}
}  // namespace

std::vector<Complex> dft2_ortho(std::span<const double> plane, std::size_t height, std::size_t width) {
  return real_dft2(plane, height, width, true);
}

namespace serial {
std::vector<Complex> dft2_ortho(std::span<const double> plane, std::size_t height, std::size_t width) {
  return real_dft2(plane, height, width, false);
}
}  // namespace serial

}  // namespace uhredit::numerics

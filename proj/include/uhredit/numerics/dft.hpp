// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace uhredit::numerics {

using Complex = std::complex<double>;

/// Unnormalized 1D DFT of a fixed length. Power-of-two lengths use an
/// iterative radix-2 FFT, short lengths a direct sum over a twiddle table,
/// and other lengths Bluestein's chirp-z transform. Immutable after
/// construction, so one plan may be shared across threads.
class Dft1d {
 public:
  explicit Dft1d(std::size_t n);
  ~Dft1d();
  Dft1d(Dft1d&&) noexcept;
  Dft1d& operator=(Dft1d&&) noexcept;

  std::size_t size() const { return n_; }

  /// X_k = sum_j x_j exp(-2 pi i jk / n), in place.
  void forward(std::span<Complex> data) const;
  /// x_j = sum_k X_k exp(+2 pi i jk / n), in place (no 1/n factor).
  void backward(std::span<Complex> data) const;

 private:
  struct Impl;
  std::size_t n_;
  std::unique_ptr<Impl> impl_;
};

/// Orthonormal 2D DFT plan for H x W row-major planes.
class Dft2d {
 public:
  Dft2d(std::size_t height, std::size_t width);

  std::size_t height() const { return rows_.size() == 0 ? 0 : cols_.size(); }
  std::size_t width() const { return rows_.size(); }

  /// Forward transform scaled by 1/sqrt(HW).
  void forward(std::span<Complex> plane, bool parallel = true) const;
  /// Inverse (adjoint) transform scaled by 1/sqrt(HW).
  void inverse(std::span<Complex> plane, bool parallel = true) const;

 private:
  void transform(std::span<Complex> plane, bool inverse, bool parallel) const;

  Dft1d rows_;  // length W, applied to each row
  Dft1d cols_;  // length H, applied to each column
};

/// Orthonormal 2D DFT of a real H x W plane.
std::vector<Complex> dft2_ortho(std::span<const double> plane, std::size_t height, std::size_t width);

namespace serial {
std::vector<Complex> dft2_ortho(std::span<const double> plane, std::size_t height, std::size_t width);
}

}  // namespace uhredit::numerics

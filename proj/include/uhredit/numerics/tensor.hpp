// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <initializer_list>
#include <span>
#include <vector>

namespace uhredit::numerics {

/// Dense row-major float64 tensor of arbitrary rank.
///
/// Spectral operations read the last two axes as H x W and treat every
/// leading axis as a channel index.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor scalar(double v) { return Tensor({}, std::vector<double>{v}); }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::size_t height() const;
  std::size_t width() const;
  /// Product of all axes before the last two (1 for rank 2).
  std::size_t planes() const;

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool operator==(const Tensor&) const = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

/// Throws InvalidArgument when shapes differ.
void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

/// Throws InvalidArgument if any element is NaN or infinite.
void require_finite(const Tensor& t, const char* what);

// "TEN1": magic, u32 LE rank, rank x u32 LE dims, then f64 LE data.
Tensor read_ten1(const std::filesystem::path& path);
void write_ten1(const std::filesystem::path& path, const Tensor& t);

/// Row-major N x d matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

}  // namespace uhredit::numerics

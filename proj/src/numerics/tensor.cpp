// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#include "uhredit/numerics/tensor.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <string>

#include "uhredit/detail/little_endian.hpp"
#include "uhredit/error.hpp"

namespace uhredit::numerics {

namespace {
std::size_t element_count(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}
}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != element_count(shape_)) throw InvalidArgument("tensor data does not match shape");
}

std::size_t Tensor::height() const {
  if (rank() < 2) throw InvalidArgument("tensor needs rank >= 2 for spatial access");
  return shape_[rank() - 2];
}

std::size_t Tensor::width() const {
  if (rank() < 2) throw InvalidArgument("tensor needs rank >= 2 for spatial access");
  return shape_[rank() - 1];
}

std::size_t Tensor::planes() const {
  if (rank() < 2) throw InvalidArgument("tensor needs rank >= 2 for spatial access");
  return std::accumulate(shape_.begin(), shape_.end() - 2, std::size_t{1}, std::multiplies<>());
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b)) throw InvalidArgument(std::string(what) + ": tensor shapes differ");
}

void require_finite(const Tensor& t, const char* what) {
  for (double v : t.data()) {
    if (!std::isfinite(v)) throw InvalidArgument(std::string(what) + ": non-finite input");
  }
}

Tensor read_ten1(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  detail::expect_magic(in, "TEN1");
  const auto rank = detail::read_le<std::uint32_t>(in);
  std::vector<std::size_t> shape(rank);
  for (auto& d : shape) d = detail::read_le<std::uint32_t>(in);
  std::vector<double> data(element_count(shape));
  for (auto& v : data) v = detail::read_le<double>(in);
  return Tensor(std::move(shape), std::move(data));
}

void write_ten1(const std::filesystem::path& path, const Tensor& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write("TEN1", 4);
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
  for (auto d : t.shape()) detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  for (double v : t.data()) detail::write_le<double>(out, v);
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace uhredit::numerics

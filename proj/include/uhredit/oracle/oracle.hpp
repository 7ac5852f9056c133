// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

// Slow, obviously-correct reference computations. Test and self-check use only.

#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "uhredit/image.hpp"
#include "uhredit/quality/quality.hpp"

namespace uhredit::oracle {

/// Orthonormal 2D DFT by the O((HW)^2) definition.
std::vector<std::complex<double>> dft2_bruteforce(std::span<const double> plane, std::size_t h, std::size_t w);

/// Symmetric co-occurrence counts by enumerating every in-bounds pixel pair.
std::vector<std::uint64_t> glcm_counts_bruteforce(const GrayImage& img, int levels,
                                                  std::span<const quality::GlcmOffset> offsets);

/// Features straight from the normalized matrix.
quality::TextureFeatures glcm_features_bruteforce(const GrayImage& img, int levels,
                                                  std::span<const quality::GlcmOffset> offsets);

/// Mean of Gx^2 + Gy^2 over interior pixels by explicit 3x3 correlation.
double tenengrad_bruteforce(const GrayImage& img);

/// Per-pixel HSV saturation mean and population standard deviation.
quality::SaturationStats saturation_bruteforce(const ImageTensor& img);

/// Squared Frechet distance between 1D Gaussians: (m1-m2)^2 + (s1-s2)^2.
double frechet_1d(double mean1, double sd1, double mean2, double sd2);

/// Closed form for diagonal covariances: ||m1-m2||^2 + sum (sqrt v1 - sqrt v2)^2.
double frechet_diagonal(std::span<const double> mean1, std::span<const double> var1, std::span<const double> mean2,
                        std::span<const double> var2);

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for every i.
std::vector<double> central_difference(const std::function<double(std::span<const double>)>& f,
                                       std::span<const double> x, double step);

/// ||a - b|| / max(||a||, ||b||), or 0 when both are zero.
double relative_error(std::span<const double> a, std::span<const double> b);

/// Mean |(u, v)| by direct summation.
double mean_magnitude(std::span<const float> u, std::span<const float> v);

}  // namespace uhredit::oracle

// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#include "uhredit/oracle/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace uhredit::oracle {

std::vector<std::complex<double>> dft2_bruteforce(std::span<const double> plane, std::size_t h, std::size_t w) {
  if (plane.size() != h * w) throw std::invalid_argument("dft2_bruteforce: size mismatch");
  std::vector<std::complex<double>> out(h * w);
  const double norm = 1.0 / std::sqrt(static_cast<double>(h * w));
  for (std::size_t u = 0; u < h; ++u) {
    for (std::size_t v = 0; v < w; ++v) {
      std::complex<double> acc{};
      for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
          const double phase = -2.0 * std::numbers::pi *
                               (static_cast<double>(u * y) / static_cast<double>(h) +
                                static_cast<double>(v * x) / static_cast<double>(w));
          acc += plane[y * w + x] * std::complex<double>(std::cos(phase), std::sin(phase));
        }
      }
      out[u * w + v] = acc * norm;
    }
  }
  return out;
}

std::vector<std::uint64_t> glcm_counts_bruteforce(const GrayImage& img, int levels,
                                                  std::span<const quality::GlcmOffset> offsets) {
  const auto bin = [&](double v) {
    int b = static_cast<int>(std::floor(std::clamp(v, 0.0, 1.0) * levels));
    return b >= levels ? levels - 1 : b;
  };
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(levels) * levels, 0);
  for (const auto& o : offsets) {
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        const int y2 = y + o.dy, x2 = x + o.dx;
        if (y2 < 0 || y2 >= img.height || x2 < 0 || x2 >= img.width) continue;
        const int a = bin(img.at(y, x)), b = bin(img.at(y2, x2));
        counts[static_cast<std::size_t>(a) * levels + b] += 1;
        counts[static_cast<std::size_t>(b) * levels + a] += 1;
      }
    }
  }
  return counts;
}

quality::TextureFeatures glcm_features_bruteforce(const GrayImage& img, int levels,
                                                  std::span<const quality::GlcmOffset> offsets) {
  const auto counts = glcm_counts_bruteforce(img, levels, offsets);
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  quality::TextureFeatures f;
  for (int i = 0; i < levels; ++i) {
    for (int j = 0; j < levels; ++j) {
      const double p = static_cast<double>(counts[static_cast<std::size_t>(i) * levels + j]) / total;
      if (p == 0.0) continue;
      const double d = i - j;
      f.contrast += p * d * d;
      f.energy += p * p;
      f.homogeneity += p / (1.0 + std::abs(d));
      f.entropy -= p * std::log(p);
    }
  }
  return f;
}

double tenengrad_bruteforce(const GrayImage& img) {
  static constexpr int kx[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
  static constexpr int ky[3][3] = {{-1, -2, -1}, {0, 0, 0}, {1, 2, 1}};
  double sum = 0.0;
  std::size_t n = 0;
  for (int y = 1; y + 1 < img.height; ++y) {
    for (int x = 1; x + 1 < img.width; ++x) {
      double gx = 0.0, gy = 0.0;
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          gx += kx[i][j] * img.at(y + i - 1, x + j - 1);
          gy += ky[i][j] * img.at(y + i - 1, x + j - 1);
        }
      }
      sum += gx * gx + gy * gy;
      ++n;
    }
  }
  return sum / static_cast<double>(n);
}

quality::SaturationStats saturation_bruteforce(const ImageTensor& img) {
  std::vector<double> s;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double r = img.at(y, x, 0), g = img.at(y, x, 1), b = img.at(y, x, 2);
      const double mx = std::max({r, g, b}), mn = std::min({r, g, b});
      s.push_back(mx == 0.0 ? 0.0 : (mx - mn) / mx);
    }
  }
  double mean = 0.0;
  for (double v : s) mean += v;
  mean /= static_cast<double>(s.size());
  double var = 0.0;
  for (double v : s) var += (v - mean) * (v - mean);
  return {mean, std::sqrt(var / static_cast<double>(s.size()))};
}

double frechet_1d(double mean1, double sd1, double mean2, double sd2) {
  return (mean1 - mean2) * (mean1 - mean2) + (sd1 - sd2) * (sd1 - sd2);
}

double frechet_diagonal(std::span<const double> mean1, std::span<const double> var1, std::span<const double> mean2,
                        std::span<const double> var2) {
  double d = 0.0;
  for (std::size_t i = 0; i < mean1.size(); ++i) {
    const double dm = mean1[i] - mean2[i];
    const double ds = std::sqrt(var1[i]) - std::sqrt(var2[i]);
    d += dm * dm + ds * ds;
  }
  return d;
}

std::vector<double> central_difference(const std::function<double(std::span<const double>)>& f,
                                       std::span<const double> x, double step) {
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + step;
    const double up = f(probe);
    probe[i] = x[i] - step;
    const double down = f(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

double relative_error(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("relative_error: size mismatch");
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double scale = std::sqrt(std::max(na, nb));
  return scale == 0.0 ? 0.0 : std::sqrt(diff) / scale;
}

double mean_magnitude(std::span<const float> u, std::span<const float> v) {
  long double sum = 0.0L;
  for (std::size_t i = 0; i < u.size(); ++i) {
    sum += std::sqrt(static_cast<long double>(u[i]) * u[i] + static_cast<long double>(v[i]) * v[i]);
  }
  return static_cast<double>(sum / static_cast<long double>(u.size()));
}

}  // namespace uhredit::oracle

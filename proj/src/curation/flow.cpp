// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#include "uhredit/curation/flow.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "uhredit/detail/little_endian.hpp"
#include "uhredit/error.hpp"
#include "uhredit/quality/quality.hpp"

namespace uhredit::curation {

namespace {

GrayImage half_size(const GrayImage& g) {
  GrayImage out(g.height / 2, g.width / 2);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      out.at(y, x) = 0.25 * (g.at(2 * y, 2 * x) + g.at(2 * y, 2 * x + 1) + g.at(2 * y + 1, 2 * x) +
                             g.at(2 * y + 1, 2 * x + 1));
    }
  }
  return out;
}

double sample_bilinear(const GrayImage& g, double y, double x) {
  y = std::clamp(y, 0.0, static_cast<double>(g.height - 1));
  x = std::clamp(x, 0.0, static_cast<double>(g.width - 1));
  const int y0 = std::min(static_cast<int>(y), g.height - 1);
  const int x0 = std::min(static_cast<int>(x), g.width - 1);
  const int y1 = std::min(y0 + 1, g.height - 1);
  const int x1 = std::min(x0 + 1, g.width - 1);
  const double fy = y - y0;
  const double fx = x - x0;
  return (1 - fy) * ((1 - fx) * g.at(y0, x0) + fx * g.at(y0, x1)) + fy * ((1 - fx) * g.at(y1, x0) + fx * g.at(y1, x1));
}

// Inclusive prefix sums with a zero border row/column: (h+1) x (w+1).
std::vector<double> integral(const std::vector<double>& v, int h, int w) {
  std::vector<double> s(static_cast<std::size_t>(h + 1) * (w + 1), 0.0);
  for (int y = 0; y < h; ++y) {
    double row = 0.0;
    for (int x = 0; x < w; ++x) {
      row += v[static_cast<std::size_t>(y) * w + x];
      s[static_cast<std::size_t>(y + 1) * (w + 1) + x + 1] = s[static_cast<std::size_t>(y) * (w + 1) + x + 1] + row;
    }
  }
  return s;
}

double window_sum(const std::vector<double>& s, int w, int y0, int x0, int y1, int x1) {
  const auto at = [&](int y, int x) { return s[static_cast<std::size_t>(y) * (w + 1) + x]; };
  return at(y1, x1) - at(y0, x1) - at(y1, x0) + at(y0, x0);
}

template <bool Parallel>
void refine_level(const GrayImage& a, const GrayImage& b, FlowField& flow, const FlowOptions& opt) {
  const int h = a.height, w = a.width, r = opt.window / 2;
  const std::size_t n = static_cast<std::size_t>(h) * w;
  std::vector<double> ix(n), iy(n);

  #pragma omp parallel for schedule(static) if (Parallel)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int xm = std::max(x - 1, 0), xp = std::min(x + 1, w - 1);
      const int ym = std::max(y - 1, 0), yp = std::min(y + 1, h - 1);
      ix[static_cast<std::size_t>(y) * w + x] =
          ((a.at(ym, xp) + 2 * a.at(y, xp) + a.at(yp, xp)) - (a.at(ym, xm) + 2 * a.at(y, xm) + a.at(yp, xm))) /
          (4.0 * (xp - xm));
      iy[static_cast<std::size_t>(y) * w + x] =
          ((a.at(yp, xm) + 2 * a.at(yp, x) + a.at(yp, xp)) - (a.at(ym, xm) + 2 * a.at(ym, x) + a.at(ym, xp))) /
          (4.0 * (yp - ym));
    }
  }

  std::vector<double> xx(n), xy(n), yy(n);
  for (std::size_t i = 0; i < n; ++i) {
    xx[i] = ix[i] * ix[i];
    xy[i] = ix[i] * iy[i];
    yy[i] = iy[i] * iy[i];
  }
  const auto sxx = integral(xx, h, w), sxy = integral(xy, h, w), syy = integral(yy, h, w);

  std::vector<double> bx(n), by(n);
  for (int it = 0; it < opt.iterations; ++it) {
    #pragma omp parallel for schedule(static) if (Parallel)
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        // Linearized target for g . d at this pixel, given its current estimate.
        const double diff = sample_bilinear(b, y + flow.v[i], x + flow.u[i]) - a.at(y, x);
        const double c = ix[i] * flow.u[i] + iy[i] * flow.v[i] - diff;
        bx[i] = ix[i] * c;
        by[i] = iy[i] * c;
      }
    }
    const auto sbx = integral(bx, h, w), sby = integral(by, h, w);
    std::vector<float> next_u = flow.u, next_v = flow.v;

    #pragma omp parallel for schedule(static) if (Parallel)
    for (int y = 0; y < h; ++y) {
      const int y0 = std::max(0, y - r), y1 = std::min(h, y + r + 1);
      for (int x = 0; x < w; ++x) {
        const int x0 = std::max(0, x - r), x1 = std::min(w, x + r + 1);
        const double area = static_cast<double>(y1 - y0) * (x1 - x0);
        const double gxx = window_sum(sxx, w, y0, x0, y1, x1);
        const double gxy = window_sum(sxy, w, y0, x0, y1, x1);
        const double gyy = window_sum(syy, w, y0, x0, y1, x1);
        const double tr = gxx + gyy;
        const double det = gxx * gyy - gxy * gxy;
        const double min_eig = 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4.0 * det)));
        if (min_eig / area < opt.min_eigenvalue || det <= 0.0) continue;
        const double ex = window_sum(sbx, w, y0, x0, y1, x1);
        const double ey = window_sum(sby, w, y0, x0, y1, x1);
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        next_u[i] = static_cast<float>((gyy * ex - gxy * ey) / det);
        next_v[i] = static_cast<float>((gxx * ey - gxy * ex) / det);
      }
    }
    flow.u.swap(next_u);
    flow.v.swap(next_v);
  }
}

FlowField upsample_flow(const FlowField& coarse, int h, int w) {
  FlowField fine(h, w);
  GrayImage cu(coarse.height, coarse.width), cv(coarse.height, coarse.width);
  std::copy(coarse.u.begin(), coarse.u.end(), cu.data.begin());
  std::copy(coarse.v.begin(), coarse.v.end(), cv.data.begin());
  const double sy = static_cast<double>(coarse.height) / h, sx = static_cast<double>(coarse.width) / w;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double py = (y + 0.5) * sy - 0.5, px = (x + 0.5) * sx - 0.5;
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      fine.u[i] = static_cast<float>(sample_bilinear(cu, py, px) / sx);
      fine.v[i] = static_cast<float>(sample_bilinear(cv, py, px) / sy);
    }
  }
  return fine;
}

template <bool Parallel>
FlowField pyramidal_flow(const GrayImage& a, const GrayImage& b, const FlowOptions& opt) {
  if (a.height != b.height || a.width != b.width) throw InvalidArgument("optical_flow: frame dimensions differ");
  if (opt.window < 3 || opt.pyramid_levels < 1 || opt.iterations < 1) {
    throw InvalidArgument("optical_flow: invalid options");
  }
  if (a.height < opt.window || a.width < opt.window) {
    throw InvalidArgument("optical_flow: frames smaller than the LK window");
  }

  std::vector<GrayImage> pa{a}, pb{b};
  while (static_cast<int>(pa.size()) < opt.pyramid_levels && pa.back().height / 2 >= opt.window &&
         pa.back().width / 2 >= opt.window) {
    pa.push_back(half_size(pa.back()));
    pb.push_back(half_size(pb.back()));
  }

  FlowField flow(pa.back().height, pa.back().width);
  for (int level = static_cast<int>(pa.size()) - 1; level >= 0; --level) {
    if (flow.height != pa[level].height || flow.width != pa[level].width) {
      flow = upsample_flow(flow, pa[level].height, pa[level].width);
    }
    refine_level<Parallel>(pa[level], pb[level], flow, opt);
  }
  return flow;
}

double scaled_motion(const FlowField& f, double sy, double sx) {
  double acc = 0.0;
  for (std::size_t i = 0; i < f.u.size(); ++i) acc += std::hypot(f.u[i] * sx, f.v[i] * sy);
  return f.u.empty() ? 0.0 : acc / static_cast<double>(f.u.size());
}

}  // namespace

FlowField optical_flow(const GrayImage& a, const GrayImage& b, const FlowOptions& options) {
  return pyramidal_flow<true>(a, b, options);
}

namespace serial {
FlowField optical_flow(const GrayImage& a, const GrayImage& b, const FlowOptions& options) {
  return pyramidal_flow<false>(a, b, options);
}
}  // namespace serial

double motion_score(const FlowField& flow) { return scaled_motion(flow, 1.0, 1.0); }

FlowField read_flo1(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  detail::expect_magic(in, "FLO1");
  const auto h = detail::read_le<std::uint32_t>(in);
  const auto w = detail::read_le<std::uint32_t>(in);
  FlowField f(static_cast<int>(h), static_cast<int>(w));
  for (auto& x : f.u) x = detail::read_le<float>(in);
  for (auto& x : f.v) x = detail::read_le<float>(in);
  return f;
}

void write_flo1(const std::filesystem::path& path, const FlowField& flow) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write("FLO1", 4);
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(flow.height));
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(flow.width));
  for (float x : flow.u) detail::write_le<float>(out, x);
  for (float x : flow.v) detail::write_le<float>(out, x);
}

double LucasKanadeMotion::motion(const ImageTensor& a, const ImageTensor& b, std::string_view,
                                 std::string_view) const {
  if (a.height() != b.height() || a.width() != b.width()) throw InvalidArgument("motion: frame dimensions differ");
  GrayImage ga = quality::to_grayscale(a), gb = quality::to_grayscale(b);
  const int longest = std::max(ga.height, ga.width);
  if (longest > options_.max_side) {
    const double s = static_cast<double>(options_.max_side) / longest;
    const int h = std::max(1, static_cast<int>(std::lround(ga.height * s)));
    const int w = std::max(1, static_cast<int>(std::lround(ga.width * s)));
    ga = resize_area(ga, h, w);
    gb = resize_area(gb, h, w);
  }
  const double sy = static_cast<double>(a.height()) / ga.height;
  const double sx = static_cast<double>(a.width()) / ga.width;
  const double forward = scaled_motion(optical_flow(ga, gb, options_.flow), sy, sx);
  if (!options_.bidirectional) return forward;
  const double backward = scaled_motion(optical_flow(gb, ga, options_.flow), sy, sx);
  return 0.5 * (forward + backward);
}

DirectoryMotion::DirectoryMotion(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (!std::filesystem::is_directory(dir_)) throw ProviderError("flow directory not found: " + dir_.string());
}

double DirectoryMotion::motion(const ImageTensor&, const ImageTensor&, std::string_view key_a,
                               std::string_view key_b) const {
  const auto forward = dir_ / (std::string(key_a) + "_" + std::string(key_b) + ".flo");
  const auto backward = dir_ / (std::string(key_b) + "_" + std::string(key_a) + ".flo");
  try {
    const bool has_f = std::filesystem::exists(forward), has_b = std::filesystem::exists(backward);
    if (!has_f && !has_b) throw ProviderError("no precomputed flow for pair " + std::string(key_a));
    if (has_f && has_b) return 0.5 * (motion_score(read_flo1(forward)) + motion_score(read_flo1(backward)));
    return motion_score(read_flo1(has_f ? forward : backward));
  } catch (const IoError& e) {
    throw ProviderError(e.what());
  }
}

std::shared_ptr<MotionEstimator> make_motion_estimator(const std::string& spec, const MotionOptions& options) {
  if (spec.empty() || spec == "builtin") return std::make_shared<LucasKanadeMotion>(options);
  return std::make_shared<DirectoryMotion>(spec);
}

}  // namespace uhredit::curation

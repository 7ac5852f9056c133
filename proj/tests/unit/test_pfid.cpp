// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "uhredit/error.hpp"
#include "uhredit/pfid/pfid.hpp"

using namespace uhredit;
using namespace uhredit::pfid;
using uhredit::testing::Rng;

namespace {

Eigen::MatrixXd random_spd(int d, Rng& rng) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = nd(rng);
  return a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(d, d);
}

GaussianStats stats_1d(double mean, double var) {
  GaussianStats s;
  s.mean = Eigen::VectorXd::Constant(1, mean);
  s.covariance = Eigen::MatrixXd::Constant(1, 1, var);
  s.count = 100;
  return s;
}

std::vector<ImageTensor> image_set(int n, std::uint64_t seed) {
  std::vector<ImageTensor> v;
  for (int i = 0; i < n; ++i) v.push_back(testing::textured_rgb(64, 64, seed + i));
  return v;
}

}  // namespace

TEST_CASE("patch anchors and extraction") {
  PatchConfig cfg;
  cfg.patch_size = 4;
  cfg.stride = 4;
  CHECK(patch_anchors(8, 8, cfg) == std::vector<PatchAnchor>{{0, 0}, {0, 4}, {4, 0}, {4, 4}});
  const ImageTensor img = testing::textured_rgb(8, 8, 51);
  const auto patches = extract_patches(img, cfg);
  REQUIRE(patches.size() == 4);
  CHECK(patches[3] == img.crop(4, 4, 4, 4));

  cfg.patch_size = 8;
  CHECK(patch_anchors(8, 8, cfg).size() == 1);

  PatchConfig big;
  CHECK(patch_anchors(4096, 4096, big).size() == 64);

  PatchConfig rnd;
  rnd.patch_size = 16;
  rnd.stride = 8;
  rnd.max_patches_per_image = 10;
  rnd.sampling = Sampling::random;
  rnd.seed = 9;
  const auto a = patch_anchors(128, 128, rnd, 3);
  CHECK(a.size() == 10);
  CHECK(patch_anchors(128, 128, rnd, 3) == a);
  CHECK(patch_anchors(128, 128, rnd, 4) != a);
  for (std::size_t i = 1; i < a.size(); ++i) CHECK_FALSE(a[i] == a[i - 1]);

  PatchConfig too_big;
  too_big.patch_size = 16;
  too_big.stride = 16;
  CHECK_THROWS_AS(patch_anchors(8, 32, too_big), InvalidArgument);
  PatchConfig zero_stride;
  zero_stride.stride = 0;
  CHECK_THROWS_AS(zero_stride.validate(), InvalidArgument);
}

TEST_CASE("gaussian_stats") {
  const auto same = gaussian_stats(std::vector<std::vector<double>>(5, {1.0, 2.0, 3.0}));
  CHECK(same.covariance.norm() == 0.0);
  const auto pm = gaussian_stats(std::vector<std::vector<double>>{{-1.0}, {1.0}});
  CHECK(pm.mean(0) == 0.0);
  CHECK(pm.covariance(0, 0) == doctest::Approx(2.0));

  Rng rng(52);
  std::normal_distribution<double> nd;
  const int n = 20000;
  std::vector<std::vector<double>> xs;
  for (int i = 0; i < n; ++i) {
    const double z1 = nd(rng), z2 = nd(rng);
    xs.push_back({1.0 + 2.0 * z1, -3.0 + 0.5 * z1 + z2});
  }
  const auto s = gaussian_stats(xs);
  // True mean (1, -3); covariance [[4, 1], [1, 1.25]].
  CHECK(std::abs(s.mean(0) - 1.0) <= 3 * 2.0 / std::sqrt(n));
  CHECK(std::abs(s.mean(1) + 3.0) <= 3 * std::sqrt(1.25) / std::sqrt(n));
  CHECK(std::abs(s.covariance(0, 0) - 4.0) <= 3 * 4.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(s.covariance(0, 1) - 1.0) <= 3 * std::sqrt((4.0 * 1.25 + 1.0) / n));
  CHECK(s.covariance(0, 1) == s.covariance(1, 0));

  CHECK_THROWS_AS(gaussian_stats(std::vector<std::vector<double>>{{1.0}}), InvalidArgument);
  CHECK_THROWS_AS(gaussian_stats(std::vector<std::vector<double>>{{1.0}, {1.0, 2.0}}), InvalidArgument);

  // Merging split accumulators matches a single pass.
  MomentAccumulator all(2), left(2), right(2);
  for (int i = 0; i < 1000; ++i) {
    all.add(std::span<const double>(xs[i]));
    (i < 371 ? left : right).add(std::span<const double>(xs[i]));
  }
  left.merge(right);
  CHECK((left.stats().covariance - all.stats().covariance).norm() <= 1e-10);
  CHECK((left.stats().mean - all.stats().mean).norm() <= 1e-12);
}

TEST_CASE("matrix_sqrt_psd") {
  CHECK(matrix_sqrt_psd(Eigen::MatrixXd::Identity(3, 3)).isApprox(Eigen::MatrixXd::Identity(3, 3)));
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
  d(0, 0) = 4;
  d(1, 1) = 9;
  const auto sd = matrix_sqrt_psd(d);
  CHECK(sd(0, 0) == doctest::Approx(2.0));
  CHECK(sd(1, 1) == doctest::Approx(3.0));
  CHECK(std::abs(sd(0, 1)) <= 1e-15);

  Rng rng(53);
  for (int dim : {1, 8, 32, 64}) {
    const Eigen::MatrixXd m = random_spd(dim, rng);
    const Eigen::MatrixXd s = matrix_sqrt_psd(m);
    CHECK((s * s - m).norm() <= 1e-8 * m.norm());
  }

  Eigen::MatrixXd asym = Eigen::MatrixXd::Identity(2, 2);
  asym(0, 1) = 0.5;
  CHECK_THROWS_AS(matrix_sqrt_psd(asym), InvalidArgument);
  CHECK_THROWS_AS(matrix_sqrt_psd(-Eigen::MatrixXd::Identity(2, 2)), InvalidArgument);
}

TEST_CASE("frechet_distance") {
  const auto a = stats_1d(0.5, 2.0);
  CHECK(frechet_distance(a, a) <= 1e-12);
  CHECK(frechet_distance(stats_1d(1.0, 3.0), stats_1d(-2.0, 3.0)) == doctest::Approx(9.0));
  CHECK(frechet_distance(stats_1d(0.0, 4.0), stats_1d(0.0, 9.0)) == doctest::Approx(1.0));

  Rng rng(54);
  GaussianStats p, q;
  p.mean = Eigen::VectorXd::Random(6);
  q.mean = Eigen::VectorXd::Random(6);
  p.covariance = random_spd(6, rng);
  q.covariance = random_spd(6, rng);
  p.count = q.count = 10;
  CHECK(frechet_distance(p, q) == frechet_distance(q, p));
  CHECK(frechet_distance(p, q) >= 0.0);
  CHECK_THROWS_AS(frechet_distance(p, a), InvalidArgument);
}

TEST_CASE("pfid on images") {
  PatchConfig cfg;
  cfg.patch_size = 16;
  cfg.stride = 16;
  curation::FallbackEmbeddingProvider fb;
  const auto real = image_set(8, 100);  // 8 x 16 = 128 patches > D + 1
  const PfidResult same = pfid::pfid(real, real, fb, cfg);
  CHECK(same.score <= 1e-6);
  CHECK(same.real_patches == 128);
  CHECK(same.dimension == 64);
  CHECK(same.provider == fb.identity());

  const auto gen = image_set(8, 200);
  const double s1 = pfid::pfid(real, gen, fb, cfg).score;
  CHECK(pfid::pfid(gen, real, fb, cfg).score == doctest::Approx(s1).epsilon(1e-9));
  CHECK(pfid::pfid(real, gen, fb, cfg).score == s1);

  CHECK_THROWS_AS(pfid::pfid(image_set(1, 1), real, fb, cfg), InvalidArgument);
  CHECK_THROWS_AS(pfid::pfid({}, real, fb, cfg), InvalidArgument);
}

TEST_CASE("pfid shrinks as generated images are replaced by real ones") {
  PatchConfig cfg;
  cfg.patch_size = 16;
  cfg.stride = 8;
  curation::FallbackEmbeddingProvider fb;
  const auto real = image_set(20, 300);
  std::vector<ImageTensor> gen;
  for (int i = 0; i < 20; ++i) {
    ImageTensor g = testing::noisy_rgb(64, 64, 400 + i, 0.5, 0.3);
    gen.push_back(box_blur(g, 1));
  }
  std::vector<double> scores;
  for (int k = 0; k <= 20; k += 5) {
    std::vector<ImageTensor> mix = gen;
    for (int i = 0; i < k; ++i) mix[i] = real[i];
    scores.push_back(pfid::pfid(real, mix, fb, cfg).score);
  }
  for (std::size_t i = 1; i < scores.size(); ++i) CHECK(scores[i] < scores[i - 1]);
  CHECK(scores.back() <= 1e-6);
}

TEST_CASE("list_images") {
  const auto dir = testing::scratch_dir("list_images");
  write_png(dir / "b.png", ImageTensor::filled(4, 4, 3, 0.5f));
  write_png(dir / "a.png", ImageTensor::filled(4, 4, 3, 0.5f));
  testing::scratch_dir("list_images_other");
  const auto files = list_images(dir);
  REQUIRE(files.size() == 2);
  CHECK(files[0].filename() == "a.png");
}

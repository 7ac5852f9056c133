// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "uhredit/curation/embedding.hpp"
#include "uhredit/curation/flow.hpp"
#include "uhredit/curation/pairs.hpp"
#include "uhredit/error.hpp"
#include "uhredit/oracle/oracle.hpp"

using namespace uhredit;
using namespace uhredit::curation;
using uhredit::testing::Rng;

namespace {

void check_partition(const std::vector<ClipBoundary>& clips, std::size_t n) {
  REQUIRE_FALSE(clips.empty());
  CHECK(clips.front().start == 0);
  CHECK(clips.back().end == n);
  for (std::size_t i = 0; i < clips.size(); ++i) {
    CHECK(clips[i].start < clips[i].end);
    if (i > 0) CHECK(clips[i].start == clips[i - 1].end);
  }
}

double mean_of(const std::vector<float>& v) {
  double s = 0.0;
  for (float x : v) s += x;
  return s / static_cast<double>(v.size());
}

// b is `canvas` read dx columns to the left and dy rows up, so b(p + d) = a(p).
std::pair<GrayImage, GrayImage> shifted(int side, int dy, int dx, std::uint64_t seed) {
  const int m = 8;
  const GrayImage canvas = testing::textured_gray(side + 2 * m, side + 2 * m, seed);
  return {testing::crop_gray(canvas, m, m, side, side), testing::crop_gray(canvas, m - dy, m - dx, side, side)};
}

class FailingProvider final : public EmbeddingProvider {
 public:
  Embedding embed(const ImageTensor&, std::string_view) const override { throw ProviderError("offline"); }
  std::string identity() const override { return "failing"; }
};

}  // namespace

TEST_CASE("detect_scenes") {
  const ImageTensor gray = ImageTensor::filled(8, 8, 3, 0.5f);
  FrameSequence constant(std::vector<ImageTensor>(10, gray));
  CHECK(detect_scenes(constant, 0.5, 1) == std::vector<ClipBoundary>{{0, 10}});

  std::vector<ImageTensor> cut;
  for (int i = 0; i < 10; ++i) cut.push_back(ImageTensor::filled(8, 8, 3, i < 5 ? 0.0f : 1.0f));
  FrameSequence cuts(cut);
  CHECK(histogram_distance(channel_histograms(cut[0]), channel_histograms(cut[9])) == doctest::Approx(2.0));
  CHECK(detect_scenes(cuts, 1.5, 1) == std::vector<ClipBoundary>{{0, 5}, {5, 10}});

  std::vector<ImageTensor> fade;
  for (int i = 0; i < 40; ++i) fade.push_back(ImageTensor::filled(8, 8, 3, static_cast<float>(i) / 39.0f));
  FrameSequence fades(fade);
  double max_step = 0.0;
  for (std::size_t i = 1; i < fade.size(); ++i)
    max_step = std::max(max_step, histogram_distance(channel_histograms(fade[i - 1]), channel_histograms(fade[i])));
  const auto fclips = detect_scenes(fades, max_step + 1e-9, 1);
  CHECK(fclips == std::vector<ClipBoundary>{{0, 40}});

  // Short clips merge; the result is still a partition.
  std::vector<ImageTensor> flicker;
  for (int i = 0; i < 12; ++i) flicker.push_back(ImageTensor::filled(8, 8, 3, (i == 3 || i == 7 || i == 8) ? 1.0f : 0.0f));
  const auto merged = detect_scenes(FrameSequence(flicker), 1.0, 3);
  check_partition(merged, 12);
  for (const auto& c : merged) CHECK(c.end - c.start >= 3);

  std::vector<ImageTensor> first_short{cut[0], cut[9], cut[9], cut[9], cut[9]};
  CHECK(detect_scenes(FrameSequence(first_short), 1.0, 2) == std::vector<ClipBoundary>{{0, 5}});

  CHECK_THROWS_AS(FrameSequence(std::vector<ImageTensor>{}), InvalidArgument);
}

TEST_CASE("frame sequence rejects mixed sizes") {
  CHECK_THROWS_AS(FrameSequence(std::vector<ImageTensor>{ImageTensor::filled(4, 4, 3, 0.f), ImageTensor::filled(4, 5, 3, 0.f)}),
                  InvalidArgument);
  const auto dir = testing::scratch_dir("frames");
  write_png(dir / "0.png", ImageTensor::filled(4, 4, 3, 0.f));
  write_png(dir / "1.png", ImageTensor::filled(4, 5, 3, 0.f));
  FrameSequence lazy(std::vector<std::filesystem::path>{dir / "0.png", dir / "1.png"});
  CHECK_THROWS_AS(lazy.frame(1), InvalidArgument);
}

TEST_CASE("optical_flow") {
  const GrayImage a = testing::textured_gray(96, 96, 21);
  const FlowField zero = optical_flow(a, a);
  CHECK(motion_score(zero) == 0.0);

  auto [a2, b2] = shifted(96, 0, 2, 22);
  const FlowField f2 = optical_flow(a2, b2);
  CHECK(std::abs(mean_of(f2.u) - 2.0) <= 0.5);
  CHECK(std::abs(mean_of(f2.v)) <= 0.5);

  auto [a3, b3] = shifted(96, 3, 0, 23);
  CHECK(std::abs(motion_score(optical_flow(a3, b3)) - 3.0) <= 0.5);

  const FlowField s = serial::optical_flow(a2, b2);
  const FlowField p = optical_flow(a2, b2);
  CHECK(s.u == p.u);
  CHECK(s.v == p.v);

  const FlowField flat = optical_flow(GrayImage(64, 64, 0.5), GrayImage(64, 64, 0.5));
  CHECK(motion_score(flat) == 0.0);

  CHECK_THROWS_AS(optical_flow(a, GrayImage(95, 96, 0.0)), InvalidArgument);
}

TEST_CASE("motion_score") {
  CHECK(motion_score(FlowField(4, 4)) == 0.0);
  FlowField f(3, 5);
  std::fill(f.u.begin(), f.u.end(), 3.0f);
  std::fill(f.v.begin(), f.v.end(), 4.0f);
  CHECK(motion_score(f) == doctest::Approx(5.0));

  Rng rng(24);
  FlowField r(13, 17);
  std::uniform_real_distribution<float> d(-5, 5);
  for (auto& x : r.u) x = d(rng);
  for (auto& x : r.v) x = d(rng);
  CHECK(std::abs(motion_score(r) - oracle::mean_magnitude(r.u, r.v)) <= 1e-12);
}

TEST_CASE("flo1 round trip") {
  const auto dir = testing::scratch_dir("flo1");
  FlowField f(3, 4);
  for (std::size_t i = 0; i < f.u.size(); ++i) {
    f.u[i] = static_cast<float>(i) * 0.5f;
    f.v[i] = -static_cast<float>(i);
  }
  write_flo1(dir / "f.flo", f);
  const FlowField g = read_flo1(dir / "f.flo");
  CHECK(g.height == 3);
  CHECK(g.width == 4);
  CHECK(g.u == f.u);
  CHECK(g.v == f.v);
  CHECK_THROWS_AS(read_flo1(dir / "missing.flo"), IoError);
}

TEST_CASE("semantic_similarity") {
  const std::vector<float> a{1, 2, 3}, o{3, 0, -1}, neg{-1, -2, -3}, scaled{2.5f, 5, 7.5f};
  CHECK(semantic_similarity(a, a) == doctest::Approx(1.0));
  CHECK(semantic_similarity(a, o) == doctest::Approx(0.0));
  CHECK(semantic_similarity(a, neg) == doctest::Approx(-1.0));
  CHECK(semantic_similarity(scaled, o) == doctest::Approx(semantic_similarity(a, o)));
  CHECK_THROWS_AS(semantic_similarity(std::vector<float>{0, 0, 0}, a), InvalidArgument);
  CHECK_THROWS_AS(semantic_similarity(std::vector<float>{1, 0}, a), InvalidArgument);
}

TEST_CASE("embeddings: fallback and directory providers") {
  FallbackEmbeddingProvider fb;
  const ImageTensor img = testing::textured_rgb(40, 56, 25);
  const Embedding e = fb.embed(img);
  CHECK(e.size() == FallbackEmbeddingProvider::kDimension);
  double mean = 0.0;
  for (float v : e) mean += v;
  CHECK(std::abs(mean / e.size()) < 1e-6);
  CHECK(fb.embed(img) == e);

  const auto dir = testing::scratch_dir("emb1");
  write_emb1(dir / "k.emb", e);
  CHECK(read_emb1(dir / "k.emb") == e);
  DirectoryEmbeddingProvider dp(dir);
  CHECK(dp.embed(img, "k") == e);
  CHECK_THROWS_AS(dp.embed(img, "nope"), ProviderError);
  CHECK(make_embedding_provider("builtin")->identity() == fb.identity());
}

TEST_CASE("classify_pair") {
  const PairThresholds t;
  CHECK(classify_pair(1.0, 0.0, t) == PairVerdict::drop_similar);
  CHECK(classify_pair(0.5, 50.0, t) == PairVerdict::drop_misaligned);
  CHECK(classify_pair(0.9, 10.0, t) == PairVerdict::keep);
  CHECK(classify_pair(0.985, 0.5, t) == PairVerdict::drop_similar);
  CHECK(classify_pair(0.80, 40.0, t) == PairVerdict::drop_misaligned);

  // Mutually exclusive whenever the bands are ordered.
  Rng rng(26);
  std::uniform_real_distribution<double> sim(-1, 1), mot(0, 100);
  for (int i = 0; i < 1000; ++i) {
    const double s = sim(rng), m = mot(rng);
    const bool similar = s >= t.sim_high && m <= t.motion_low;
    const bool misaligned = m >= t.motion_high && s <= t.sim_low;
    CHECK_FALSE((similar && misaligned));
  }

  PairThresholds bad;
  bad.sim_low = 0.99;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = {};
  bad.motion_low = 50;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("score_pair fixtures and symmetry") {
  FallbackEmbeddingProvider fb;
  LucasKanadeMotion lk;
  const PairThresholds t;
  const auto near = testing::near_identical_pair();
  CHECK(score_pair(near.a, near.b, fb, lk, t).verdict == PairVerdict::drop_similar);
  const auto mis = testing::misaligned_pair();
  const PairScore ms = score_pair(mis.a, mis.b, fb, lk, t);
  CHECK(ms.verdict == PairVerdict::drop_misaligned);
  CHECK(score_pair(mis.b, mis.a, fb, lk, t).verdict == ms.verdict);
  const auto tr = testing::transition_pair();
  const PairScore ts = score_pair(tr.a, tr.b, fb, lk, t);
  CHECK(ts.verdict == PairVerdict::keep);
  CHECK(score_pair(tr.b, tr.a, fb, lk, t).verdict == PairVerdict::keep);
  CHECK(ts.motion_score == doctest::Approx(score_pair(tr.b, tr.a, fb, lk, t).motion_score).epsilon(1e-9));

  FailingProvider failing;
  const PairScore err = score_pair(near.a, near.b, failing, lk, t);
  CHECK(err.verdict == PairVerdict::scoring_error);
  REQUIRE(err.error.has_value());
}

TEST_CASE("mine_pairs") {
  std::vector<ImageTensor> frames;
  const GrayImage canvas = testing::textured_gray(64, 96, 27);
  for (int i = 0; i < 6; ++i) frames.push_back(testing::gray_to_tensor(testing::crop_gray(canvas, 0, 3 * i, 64, 64)));
  for (int i = 0; i < 6; ++i) frames.push_back(ImageTensor::filled(64, 64, 1, 1.0f));
  FrameSequence seq(frames);
  FallbackEmbeddingProvider fb;
  LucasKanadeMotion lk;
  PairMiningOptions opt;
  opt.min_clip_len = 2;
  opt.max_gap = 2;
  const auto pairs = mine_pairs(seq, fb, lk, opt);
  REQUIRE_FALSE(pairs.empty());
  for (const auto& p : pairs) {
    CHECK(p.first < p.second);
    CHECK(p.second - p.first <= 2);
    // Candidates never span a scene cut.
    CHECK((p.first < 6) == (p.second < 6));
  }
  // Rerun is deterministic.
  const auto again = mine_pairs(seq, fb, lk, opt);
  REQUIRE(again.size() == pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) CHECK(again[i].score.verdict == pairs[i].score.verdict);
}

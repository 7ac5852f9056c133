// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "uhredit/adherence/adherence.hpp"
#include "uhredit/curation/embedding.hpp"
#include "uhredit/pipeline/manifest.hpp"
#include "uhredit/pipeline/pipeline.hpp"

namespace uhredit::testing {

std::vector<double> random_values(std::size_t n, Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

GrayImage random_gray(int h, int w, Rng& rng) {
  return GrayImage(h, w, random_values(static_cast<std::size_t>(h) * w, rng));
}

GrayImage textured_gray(int h, int w, std::uint64_t seed) {
  Rng rng(seed);
  GrayImage g = box_blur(random_gray(h, w, rng), 2);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  const double p1 = phase(rng), p2 = phase(rng), p3 = phase(rng);
  double lo = 1e9, hi = -1e9;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double v = g.at(y, x);
      v += 0.15 * std::sin(2.0 * std::numbers::pi * x / 37.0 + p1);
      v += 0.15 * std::sin(2.0 * std::numbers::pi * y / 23.0 + p2);
      v += 0.10 * std::sin(2.0 * std::numbers::pi * (x + y) / 61.0 + p3);
      g.at(y, x) = v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  for (double& v : g.data) v = 0.1 + 0.8 * (v - lo) / (hi - lo);
  return g;
}

ImageTensor textured_rgb(int h, int w, std::uint64_t seed) {
  const GrayImage r = textured_gray(h, w, seed * 3 + 1);
  const GrayImage g = textured_gray(h, w, seed * 3 + 2);
  const GrayImage b = textured_gray(h, w, seed * 3 + 3);
  std::vector<float> s(static_cast<std::size_t>(h) * w * 3);
  for (std::size_t i = 0; i < r.size(); ++i) {
    s[3 * i] = static_cast<float>(r.data[i]);
    s[3 * i + 1] = static_cast<float>(g.data[i]);
    s[3 * i + 2] = static_cast<float>(b.data[i]);
  }
  return ImageTensor(h, w, 3, std::move(s));
}

GrayImage crop_gray(const GrayImage& img, int y0, int x0, int h, int w) {
  GrayImage out(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.at(y, x) = img.at(y0 + y, x0 + x);
  return out;
}

ImageTensor gray_to_tensor(const GrayImage& g) {
  std::vector<float> s(g.data.begin(), g.data.end());
  for (float& v : s) v = std::clamp(v, 0.0f, 1.0f);
  return ImageTensor(g.height, g.width, 1, std::move(s));
}

ImageTensor noisy_rgb(int h, int w, std::uint64_t seed, double mean, double spread) {
  Rng rng(seed);
  std::uniform_real_distribution<double> dist(mean - spread, mean + spread);
  std::vector<std::uint8_t> s(static_cast<std::size_t>(h) * w * 3);
  for (auto& v : s) v = static_cast<std::uint8_t>(std::lround(std::clamp(dist(rng), 0.0, 1.0) * 255.0));
  return ImageTensor(h, w, 3, std::move(s));
}

ImageTensor recolor_square(const ImageTensor& img, int y0, int x0, int size, float r, float g, float b) {
  ImageTensor out = img;
  const float c[3] = {r, g, b};
  for (int y = y0; y < y0 + size; ++y)
    for (int x = x0; x < x0 + size; ++x)
      for (int ch = 0; ch < img.channels(); ++ch) out.set(y, x, ch, c[ch]);
  return out;
}

numerics::Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double lo, double hi) {
  numerics::Tensor t(std::move(shape));
  std::uniform_real_distribution<double> dist(lo, hi);
  for (double& v : t.data()) v = dist(rng);
  return t;
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("uhredit_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

namespace {

constexpr int kPairSide = 512;

// Large-period pattern plus fine texture, sampled on a canvas bigger than
// one frame so that crops at different offsets are exact translations.
GrayImage pair_canvas(int margin, std::uint64_t seed) {
  const int side = kPairSide + margin;
  Rng rng(seed);
  GrayImage noise = box_blur(random_gray(side, side, rng), 3);
  GrayImage g(side, side);
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      const double big = std::sin(2.0 * std::numbers::pi * x / 256.0) + std::sin(2.0 * std::numbers::pi * y / 256.0);
      g.at(y, x) = std::clamp(0.5 + 0.18 * big + 0.5 * (noise.at(y, x) - 0.5), 0.0, 1.0);
    }
  }
  return g;
}

}  // namespace

FramePair near_identical_pair() {
  const auto img = textured_rgb(kPairSide, kPairSide, 11);
  return {img, img};
}

FramePair misaligned_pair() {
  // Bright left half, darker right half, fine texture everywhere; the second
  // frame swaps every left-half tile with a right-half tile.
  constexpr int kTiles = 4, kTile = kPairSide / kTiles;
  Rng rng(12);
  const GrayImage fine = box_blur(random_gray(kPairSide, kPairSide, rng), 2);
  GrayImage a(kPairSide, kPairSide);
  for (int y = 0; y < kPairSide; ++y)
    for (int x = 0; x < kPairSide; ++x)
      a.at(y, x) = std::clamp((x < kPairSide / 2 ? 0.85 : 0.2) + 0.4 * (fine.at(y, x) - 0.5), 0.0, 1.0);

  std::vector<int> left, right;
  for (int k = 0; k < kTiles * kTiles; ++k) (k % kTiles < kTiles / 2 ? left : right).push_back(k);
  std::shuffle(left.begin(), left.end(), rng);
  std::shuffle(right.begin(), right.end(), rng);
  GrayImage b(kPairSide, kPairSide);
  std::size_t li = 0, ri = 0;
  for (int k = 0; k < kTiles * kTiles; ++k) {
    const int src = k % kTiles < kTiles / 2 ? right[ri++] : left[li++];
    const int sy = src / kTiles * kTile, sx = src % kTiles * kTile, dy = k / kTiles * kTile, dx = k % kTiles * kTile;
    for (int y = 0; y < kTile; ++y)
      for (int x = 0; x < kTile; ++x) b.at(dy + y, dx + x) = a.at(sy + y, sx + x);
  }
  return {gray_to_tensor(a), gray_to_tensor(b)};
}

FramePair transition_pair() {
  constexpr int kShift = 6;
  const GrayImage canvas = pair_canvas(kShift, 13);
  return {gray_to_tensor(crop_gray(canvas, 0, kShift, kPairSide, kPairSide)),
          gray_to_tensor(crop_gray(canvas, 0, 0, kPairSide, kPairSide))};
}

}  // namespace uhredit::testing

namespace uhredit::testing {

namespace {

ImageTensor invert_square(const ImageTensor& img, int y0, int x0, int size) {
  ImageTensor out = img;
  for (int y = y0; y < y0 + size; ++y)
    for (int x = x0; x < x0 + size; ++x)
      for (int c = 0; c < img.channels(); ++c) out.set(y, x, c, 1.0f - img.at(y, x, c));
  return out;
}

}  // namespace

PlantedCorpus make_planted_corpus(const std::string& name, std::size_t records, std::uint64_t seed) {
  constexpr int kSide = 256;
  PlantedCorpus c;
  c.dir = scratch_dir(name);
  const auto images = c.dir / "images";
  const auto instructions = c.dir / "instructions";
  std::filesystem::create_directories(images);
  std::filesystem::create_directories(instructions);

  pipeline::PipelineConfig& cfg = c.config;
  cfg.quality.sharpness_mode = pipeline::SharpnessMode::absolute;
  cfg.quality.thresholds.min_sharpness = 0.05;
  cfg.adherence.instruction_embeddings = instructions.string();
  cfg.retention_fraction = 0.2;
  cfg.seed = seed;

  curation::FallbackEmbeddingProvider fallback;
  Rng rng(seed);
  std::uniform_real_distribution<double> score(0.0, 10.0);
  std::string manifest;
  for (std::size_t i = 0; i < records; ++i) {
    char idbuf[32];
    std::snprintf(idbuf, sizeof idbuf, "r%04zu", i);
    const std::string id = idbuf;
    const auto in_path = images / (id + "_in.png");
    const auto ed_path = images / (id + "_ed.png");
    const std::string instruction = "invert the colors of the square in " + id;
    const ImageTensor input = noisy_rgb(kSide, kSide, seed * 100003 + i);

    switch (i % 10) {
      case 0:
        c.blurred.insert(id);
        write_png(in_path, input);
        write_png(ed_path, box_blur(input, 3));
        break;
      case 1:
        c.overexposed.insert(id);
        write_png(in_path, input);
        write_png(ed_path, noisy_rgb(kSide, kSide, seed * 100003 + i + 7, 0.93, 0.05));
        break;
      case 3: {
        c.duplicates.insert(id);
        char prev[32];
        std::snprintf(prev, sizeof prev, "r%04zu", i - 1);
        std::filesystem::copy_file(images / (std::string(prev) + "_in.png"), in_path);
        std::filesystem::copy_file(images / (std::string(prev) + "_ed.png"), ed_path);
        break;
      }
      case 4:
        c.unedited.insert(id);
        write_png(in_path, input);
        std::filesystem::copy_file(in_path, ed_path);
        break;
      default: {
        c.clean.insert(id);
        const int y0 = 32 + static_cast<int>(i % 7) * 16, x0 = 48 + static_cast<int>(i % 5) * 12;
        const ImageTensor edited = invert_square(input, y0, x0, 64);
        write_png(in_path, input);
        write_png(ed_path, edited);
        const auto mask = adherence::diff_mask(input, edited, cfg.adherence.pixel_threshold, cfg.adherence.morph_radius);
        const auto box = adherence::mask_bounding_box(mask);
        curation::write_emb1(instructions / (pipeline::instruction_key(instruction, cfg.digest_algorithm) + ".emb"),
                             fallback.embed(edited.crop(box.y0, box.x0, box.height, box.width)));
        break;
      }
    }
    const double s = std::round(score(rng) * 1000.0) / 1000.0;
    c.aesthetic[id] = s;
    nlohmann::ordered_json j;
    j["id"] = id;
    j["input_path"] = "images/" + in_path.filename().string();
    j["edited_path"] = "images/" + ed_path.filename().string();
    j["instruction"] = instruction;
    j["edit_type"] = "color_change";
    j["scores"] = {{"laion_aesthetic", s}};
    manifest += j.dump() + "\n";
  }
  c.manifest = c.dir / "manifest.jsonl";
  pipeline::write_file_atomic(c.manifest, manifest);
  return c;
}

}  // namespace uhredit::testing

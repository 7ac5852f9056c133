// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "uhredit/adherence/adherence.hpp"

using namespace uhredit;
using namespace uhredit::adherence;
using uhredit::testing::Rng;

namespace {

class FixedProvider final : public curation::EmbeddingProvider {
 public:
  explicit FixedProvider(curation::Embedding e) : e_(std::move(e)) {}
  curation::Embedding embed(const ImageTensor&, std::string_view) const override { return e_; }
  std::string identity() const override { return "fixed"; }

 private:
  curation::Embedding e_;
};

EditMask square_mask(int h, int w, int y0, int x0, int size) {
  EditMask m(h, w);
  for (int y = y0; y < y0 + size; ++y)
    for (int x = x0; x < x0 + size; ++x) m.set(y, x, true);
  return m;
}

ImageTensor offset_image(const ImageTensor& img, float delta) {
  ImageTensor out = img.to_unit_real();
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < img.channels(); ++c) out.set(y, x, c, img.at(y, x, c) + delta);
  return out;
}

}  // namespace

TEST_CASE("diff_mask") {
  const ImageTensor base = testing::textured_rgb(64, 64, 31).to_u8();
  CHECK(diff_mask(base, base, 0.06, 2).empty_region());

  const ImageTensor edited = testing::recolor_square(base, 16, 20, 32, 1.0f, 0.0f, 1.0f);
  const EditMask m = diff_mask(base, edited, 0.05, 1);
  CHECK(m == square_mask(64, 64, 16, 20, 32));
  CHECK(diff_mask(base, edited, 0.05, 1) == m);

  const auto dir = testing::scratch_dir("mask");
  std::vector<std::uint8_t> px(64 * 64);
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = m.data[i] ? 255 : 0;
  write_png(dir / "m.png", ImageTensor(64, 64, 1, px));
  CHECK(read_mask(dir / "m.png") == m);

  CHECK_THROWS_AS(diff_mask(base, testing::textured_rgb(64, 63, 1), 0.06, 2), InvalidArgument);
}

TEST_CASE("morphology keeps regions touching the border") {
  const EditMask full(16, 16, true);
  CHECK(erode(full, 2) == full);
  CHECK(morph_open(full, 2) == full);
  EditMask dot(16, 16);
  dot.set(8, 8, true);
  CHECK(morph_open(dot, 1).empty_region());
  CHECK(dilate(dot, 1).count() == 9);
  const BoundingBox b = mask_bounding_box(square_mask(16, 16, 3, 5, 4));
  CHECK(b.y0 == 3);
  CHECK(b.x0 == 5);
  CHECK(b.height == 4);
  CHECK(b.width == 4);
}

TEST_CASE("edited_region_alignment") {
  const ImageTensor img = testing::textured_rgb(48, 48, 32);
  const EditMask m = square_mask(48, 48, 8, 8, 24);
  const curation::Embedding instr{0.3f, -1.0f, 2.0f, 0.5f};
  CHECK(edited_region_alignment(img, m, instr, FixedProvider(instr)) == doctest::Approx(1.0));
  CHECK(edited_region_alignment(img, m, instr, FixedProvider({1.0f, 0.3f, 0.0f, 0.0f})) ==
        doctest::Approx(0.0).epsilon(1e-7));

  curation::FallbackEmbeddingProvider fb;
  const curation::Embedding self = fb.embed(img.crop(8, 8, 24, 24));
  CHECK(std::abs(edited_region_alignment(img, m, self, fb) - 1.0) <= 1e-6);

  CHECK_THROWS_AS(edited_region_alignment(img, EditMask(48, 48), instr, FixedProvider(instr)), NoEditRegion);
}

TEST_CASE("unedited_region_distance") {
  const ImageTensor a = testing::textured_rgb(32, 32, 33);
  const EditMask m = square_mask(32, 32, 4, 4, 8);
  CHECK(unedited_region_distance(a, a, m) == 0.0);
  CHECK(unedited_region_distance(a, a, EditMask(32, 32)) == 0.0);
  CHECK(unedited_region_distance(a, testing::textured_rgb(32, 32, 34), EditMask(32, 32, true)) == 0.0);

  const ImageTensor shifted = offset_image(a, 0.1f);
  CHECK(unedited_region_distance(a, shifted, m) == doctest::Approx(0.1).epsilon(1e-6));
  CHECK(unedited_region_distance(a, shifted, m, DistanceMode::l2) ==
        doctest::Approx(0.1 * std::sqrt(3.0 * (32 * 32 - 64))).epsilon(1e-6));

  // Differences confined to the region: growing the mask to cover them never increases the distance.
  const ImageTensor recolored = testing::recolor_square(a, 4, 4, 8, 0, 0, 0);
  const double small = unedited_region_distance(a, recolored, square_mask(32, 32, 6, 6, 4));
  const double grown = unedited_region_distance(a, recolored, m);
  CHECK(grown <= small);
  CHECK(grown == 0.0);

  CHECK_THROWS_AS(unedited_region_distance(a, testing::textured_rgb(31, 32, 1), m), InvalidArgument);
}

TEST_CASE("adherence_verdict") {
  CHECK(adherence_verdict(1.0, 0.0, 0.2, 0.05) == AdherenceVerdict::keep);
  CHECK(adherence_verdict(0.0, 0.0, 0.2, 0.05) == AdherenceVerdict::drop);
  CHECK(adherence_verdict(0.5, 0.3, 0.2, 0.1) == AdherenceVerdict::drop);

  Rng rng(35);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 500; ++i) {
    const double a = u(rng), d = u(rng) * 0.2;
    if (adherence_verdict(a, d, 0.4, 0.1) == AdherenceVerdict::keep) {
      CHECK(adherence_verdict(a + u(rng) * 0.5, d * u(rng), 0.4, 0.1) == AdherenceVerdict::keep);
    }
  }
}

// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "uhredit/curation/embedding.hpp"
#include "uhredit/error.hpp"
#include "uhredit/image.hpp"

namespace uhredit::adherence {

/// Per-pixel edited/non-edited decomposition of an image pair (1 = edited).
struct EditMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> data;

  EditMask() = default;
  EditMask(int h, int w, bool fill = false)
      : height(h), width(w), data(static_cast<std::size_t>(h) * w, fill ? 1 : 0) {}

  bool at(int y, int x) const { return data[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int y, int x, bool v) { data[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }
  std::size_t count() const;
  bool empty_region() const { return count() == 0; }
  bool operator==(const EditMask&) const = default;
};

struct BoundingBox {
  int y0 = 0, x0 = 0, height = 0, width = 0;
};

/// Raised when alignment is requested for a mask with no edited pixels. This
/// is a "no-edit" condition, distinct from a low alignment score.
class NoEditRegion : public Error {
 public:
  NoEditRegion() : Error("edit mask is empty (no-edit)") {}
};

enum class DistanceMode {
  rms,  // sqrt(mean of squared per-channel differences); resolution independent
  l2,   // sqrt(sum of squared differences), unnormalized
};

enum class AdherenceVerdict { keep, drop };

struct AdherenceScore {
  double edited_alignment = 0.0;
  double unedited_distance = 0.0;
  AdherenceVerdict verdict = AdherenceVerdict::drop;
};

/// Loads a 1-channel (or converted) PNG mask; nonzero pixels are edited.
EditMask read_mask(const std::filesystem::path& path);

/// Square structuring element of side 2r+1. Dilation pads with "not edited",
/// erosion with "edited", so regions touching the border are not eroded away.
EditMask dilate(const EditMask& m, int radius);
EditMask erode(const EditMask& m, int radius);
EditMask morph_close(const EditMask& m, int radius);
EditMask morph_open(const EditMask& m, int radius);

/// Max-channel |input - edited| > pixel_threshold, then close, then open.
EditMask diff_mask(const ImageTensor& input, const ImageTensor& edited, double pixel_threshold, int morph_radius);

BoundingBox mask_bounding_box(const EditMask& mask);

/// Cosine between the instruction embedding and the embedding of the edited
/// image cropped to the mask's bounding box. Throws NoEditRegion on an empty mask.
double edited_region_alignment(const ImageTensor& edited, const EditMask& mask,
                               std::span<const float> instruction_embedding,
                               const curation::EmbeddingProvider& provider, const std::string& crop_key = {});

double unedited_region_distance(const ImageTensor& input, const ImageTensor& edited, const EditMask& mask,
                                DistanceMode mode = DistanceMode::rms);

AdherenceVerdict adherence_verdict(double edited_alignment, double unedited_distance, double min_alignment,
                                   double max_distance);

const char* to_string(AdherenceVerdict v);

}  // namespace uhredit::adherence

// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uhredit/image.hpp"

namespace uhredit::curation {

using Embedding = std::vector<float>;

/// cos(ea, eb). Throws InvalidArgument on a zero vector or dimension mismatch.
double semantic_similarity(std::span<const float> ea, std::span<const float> eb);

// "EMB1" files: magic, u32 LE dimension, then dimension x f32 LE.
Embedding read_emb1(const std::filesystem::path& path);
void write_emb1(const std::filesystem::path& path, std::span<const float> embedding);

/// Source of image embeddings (CLIP-like). Implementations must be safe for
/// concurrent calls unless `single_flight()` returns true.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  /// `key` identifies the content (e.g. a file digest); directory-backed
  /// providers use it to look up precomputed vectors.
  virtual Embedding embed(const ImageTensor& img, std::string_view key) const = 0;
  virtual std::string identity() const = 0;
  virtual bool single_flight() const { return false; }
};

/// Deterministic classical embedding: 16x16 area-downsampled luminance, 2D
/// orthonormal DCT-II, the 8x8 lowest-frequency block flattened row-major and
/// mean-centered (D = 64).
class FallbackEmbeddingProvider final : public EmbeddingProvider {
 public:
  static constexpr int kGrid = 16;
  static constexpr int kBlock = 8;
  static constexpr int kDimension = kBlock * kBlock;

  Embedding embed(const ImageTensor& img, std::string_view key = {}) const override;
  std::string identity() const override { return "builtin:dct16x16-8x8"; }
};

Embedding fallback_embedding(const GrayImage& gray);

/// Looks up `<dir>/<key>.emb`; throws ProviderError when absent or malformed.
class DirectoryEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit DirectoryEmbeddingProvider(std::filesystem::path dir);

  Embedding embed(const ImageTensor& img, std::string_view key) const override;
  Embedding lookup(std::string_view key) const;
  std::string identity() const override { return "dir:" + dir_.string(); }

 private:
  std::filesystem::path dir_;
};

/// "builtin" yields the fallback provider, anything else a directory provider.
std::shared_ptr<EmbeddingProvider> make_embedding_provider(const std::string& spec);

}  // namespace uhredit::curation

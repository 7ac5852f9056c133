// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#include "uhredit/curation/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

#include "uhredit/detail/little_endian.hpp"
#include "uhredit/error.hpp"
#include "uhredit/quality/quality.hpp"

namespace uhredit::curation {

double semantic_similarity(std::span<const float> ea, std::span<const float> eb) {
  if (ea.size() != eb.size()) throw InvalidArgument("embedding dimension mismatch");
  if (ea.empty()) throw InvalidArgument("empty embedding");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < ea.size(); ++i) {
    dot += static_cast<double>(ea[i]) * eb[i];
    na += static_cast<double>(ea[i]) * ea[i];
    nb += static_cast<double>(eb[i]) * eb[i];
  }
  if (na == 0.0 || nb == 0.0) throw InvalidArgument("cosine similarity of a zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

Embedding read_emb1(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  detail::expect_magic(in, "EMB1");
  const auto dim = detail::read_le<std::uint32_t>(in);
  Embedding e(dim);
  for (auto& v : e) v = detail::read_le<float>(in);
  return e;
}

void write_emb1(const std::filesystem::path& path, std::span<const float> embedding) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write("EMB1", 4);
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(embedding.size()));
  for (float v : embedding) detail::write_le<float>(out, v);
  if (!out) throw IoError("write failed for " + path.string());
}

Embedding fallback_embedding(const GrayImage& gray) {
  constexpr int n = FallbackEmbeddingProvider::kGrid;
  constexpr int k = FallbackEmbeddingProvider::kBlock;
  const GrayImage small = resize_area(gray, n, n);

  // basis[u][x] = a_u cos(pi (2x+1) u / 2n)
  double basis[k][n];
  for (int u = 0; u < k; ++u) {
    const double a = u == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (int x = 0; x < n; ++x) basis[u][x] = a * std::cos(std::numbers::pi * (2 * x + 1) * u / (2.0 * n));
  }
  double rows[n][k];
  for (int y = 0; y < n; ++y) {
    for (int v = 0; v < k; ++v) {
      double acc = 0.0;
      for (int x = 0; x < n; ++x) acc += small.at(y, x) * basis[v][x];
      rows[y][v] = acc;
    }
  }
  std::vector<double> coeffs(k * k);
  for (int u = 0; u < k; ++u) {
    for (int v = 0; v < k; ++v) {
      double acc = 0.0;
      for (int y = 0; y < n; ++y) acc += basis[u][y] * rows[y][v];
      coeffs[u * k + v] = acc;
    }
  }
  const double mean = std::accumulate(coeffs.begin(), coeffs.end(), 0.0) / coeffs.size();
  Embedding e(coeffs.size());
  for (std::size_t i = 0; i < coeffs.size(); ++i) e[i] = static_cast<float>(coeffs[i] - mean);
  return e;
}

Embedding FallbackEmbeddingProvider::embed(const ImageTensor& img, std::string_view) const {
  return fallback_embedding(quality::to_grayscale(img));
}

DirectoryEmbeddingProvider::DirectoryEmbeddingProvider(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (!std::filesystem::is_directory(dir_)) throw ProviderError("embedding directory not found: " + dir_.string());
}

Embedding DirectoryEmbeddingProvider::lookup(std::string_view key) const {
  const auto path = dir_ / (std::string(key) + ".emb");
  if (!std::filesystem::exists(path)) throw ProviderError("no embedding for key " + std::string(key));
  try {
    return read_emb1(path);
  } catch (const IoError& e) {
    throw ProviderError(e.what());
  }
}

Embedding DirectoryEmbeddingProvider::embed(const ImageTensor&, std::string_view key) const { return lookup(key); }

std::shared_ptr<EmbeddingProvider> make_embedding_provider(const std::string& spec) {
  if (spec.empty() || spec == "builtin") return std::make_shared<FallbackEmbeddingProvider>();
  return std::make_shared<DirectoryEmbeddingProvider>(spec);
}

}  // namespace uhredit::curation

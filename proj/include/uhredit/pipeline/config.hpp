// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "uhredit/adherence/adherence.hpp"
#include "uhredit/curation/pairs.hpp"
#include "uhredit/quality/quality.hpp"

namespace uhredit::pipeline {

inline constexpr const char* kStagePreliminary = "preliminary";
inline constexpr const char* kStageQuality = "quality";
inline constexpr const char* kStageAdherence = "adherence";
inline constexpr const char* kStageAesthetic = "aesthetic";

struct StageToggles {
  bool preliminary = true;
  bool quality = true;
  bool adherence = true;
  bool aesthetic = true;
};

struct PreliminaryConfig {
  std::uint64_t min_bytes = 32 * 1024;
};

enum class SharpnessMode { percentile, absolute };

struct QualityStageConfig {
  quality::QualityThresholds thresholds;  // min_sharpness is used in absolute mode only
  quality::QualityOptions options;
  SharpnessMode sharpness_mode = SharpnessMode::percentile;
  double sharpness_percentile = 10.0;  // images below this percentile of the stage's tenengrad values are dropped
};

struct AdherenceStageConfig {
  double pixel_threshold = 0.06;
  int morph_radius = 2;
  double min_alignment = 0.20;
  double max_distance = 0.05;
  adherence::DistanceMode distance = adherence::DistanceMode::rms;
  std::string instruction_embeddings;          // EMB1 directory keyed by instruction-text digest
  std::string crop_embeddings = "builtin";     // "builtin" or EMB1 directory
};

enum class RankingMode { aesthetic, composite };

struct AestheticStageConfig {
  RankingMode ranking = RankingMode::aesthetic;
  /// Score providers read from each record's "scores" map, with the factor
  /// that maps them to [0, 1].
  std::vector<std::pair<std::string, double>> providers{{"laion_aesthetic", 0.1}, {"artimuse", 0.01}};
};

enum class PairFilterOrder { quality_first, pairs_first };

struct PairStageConfig {
  curation::PairMiningOptions mining;
  PairFilterOrder order = PairFilterOrder::quality_first;
  std::string embeddings = "builtin";
  std::string flow = "builtin";
};

struct PipelineConfig {
  StageToggles stages;
  PreliminaryConfig preliminary;
  QualityStageConfig quality;
  AdherenceStageConfig adherence;
  AestheticStageConfig aesthetic;
  PairStageConfig pairs;
  double retention_fraction = 0.2;
  std::string digest_algorithm = "md5";
  int workers = 0;
  std::uint64_t seed = 0;
  bool fail_open = false;  // provider failures keep the record instead of dropping it

  /// Throws ConfigError.
  void validate() const;
};

/// Strict parse: unknown keys and wrong types raise ConfigError.
PipelineConfig config_from_json(const nlohmann::json& j);
nlohmann::ordered_json config_to_json(const PipelineConfig& cfg);
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace uhredit::pipeline

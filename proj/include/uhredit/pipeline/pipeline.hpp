// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "uhredit/curation/embedding.hpp"
#include "uhredit/pipeline/config.hpp"
#include "uhredit/pipeline/manifest.hpp"

namespace uhredit::pipeline {

// Drop reasons. Quality drops use the quality check identifiers.
inline constexpr const char* kReasonUnreadable = "unreadable";
inline constexpr const char* kReasonTooSmall = "too_small";
inline constexpr const char* kReasonDuplicate = "duplicate";
inline constexpr const char* kReasonAspectRatio = "aspect_ratio";
inline constexpr const char* kReasonDimensionMismatch = "dimension_mismatch";
inline constexpr const char* kReasonNoEdit = "no-edit";
inline constexpr const char* kReasonLowAlignment = "low_alignment";
inline constexpr const char* kReasonPoorPreservation = "poor_preservation";
inline constexpr const char* kReasonProviderError = "provider_error";
inline constexpr const char* kReasonBelowRetention = "below_retention";

struct StageReport {
  std::string stage;
  std::size_t input = 0;
  std::size_t passed = 0;
  std::size_t dropped = 0;
  std::map<std::string, std::size_t> reasons;
  double wall_seconds = 0.0;
  nlohmann::ordered_json notes = nlohmann::ordered_json::object();
};

struct DropRecord {
  std::string id;
  std::string stage;
  std::string reason;
  std::string detail;
};

struct StageOutcome {
  std::vector<TripletRecord> kept;
  StageReport report;
  std::vector<DropRecord> drops;
};

struct Providers {
  std::shared_ptr<curation::EmbeddingProvider> crop_embeddings;
  std::shared_ptr<curation::EmbeddingProvider> instruction_embeddings;  // looked up by key only
};

/// Builds providers from the adherence section of the config.
Providers make_providers(const PipelineConfig& cfg);

StageOutcome stage_preliminary(std::vector<TripletRecord> records, const PipelineConfig& cfg);
StageOutcome stage_quality(std::vector<TripletRecord> records, const PipelineConfig& cfg);
StageOutcome stage_adherence(std::vector<TripletRecord> records, const PipelineConfig& cfg, const Providers& providers);
StageOutcome stage_aesthetic(std::vector<TripletRecord> records, const PipelineConfig& cfg);

/// Runs one stage by name; throws ConfigError on an unknown name.
StageOutcome run_stage(const std::string& name, std::vector<TripletRecord> records, const PipelineConfig& cfg,
                       const Providers& providers);

/// Key under which an instruction's embedding is looked up.
std::string instruction_key(const std::string& instruction, const std::string& digest_algorithm);

/// Key for the embedding of the edited image cropped to `box`.
std::string crop_key(const std::string& digest_edited, const adherence::BoundingBox& box);

/// Number of records the aesthetic stage keeps out of n.
std::size_t retained_count(std::size_t n, double fraction);

/// Fallback aesthetic score in [0, 1] from quality measurements.
double fallback_aesthetic(double tenengrad, double glcm_entropy, double mean_luminance, int glcm_levels);

struct PipelineResult {
  std::vector<TripletRecord> kept;
  std::vector<StageReport> stages;
  std::vector<DropRecord> drops;

  nlohmann::ordered_json report(const PipelineConfig& cfg) const;
};

/// preliminary -> quality -> adherence -> aesthetic, skipping disabled stages.
PipelineResult run_pipeline(std::vector<TripletRecord> records, const PipelineConfig& cfg, const Providers& providers);

nlohmann::ordered_json stage_report_json(const StageReport& r);

}  // namespace uhredit::pipeline

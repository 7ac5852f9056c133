// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#include "uhredit/pipeline/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>
#include <unordered_set>

#include "uhredit/adherence/adherence.hpp"
#include "uhredit/digest.hpp"
#include "uhredit/image.hpp"
#include "uhredit/parallel.hpp"
#include "uhredit/quality/quality.hpp"

namespace uhredit::pipeline {

namespace {

using OJson = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

struct Drop {
  std::string reason;
  std::string detail;
};

using Verdict = std::optional<Drop>;

// Quality reasons, most fundamental first.
constexpr const char* kQualityPriority[] = {quality::kCheckAspectRatio, quality::kCheckExposure,
                                            quality::kCheckSaturation, quality::kCheckSharpness,
                                            quality::kCheckTexture};

const std::string kAlignmentMode = "edited_crop_vs_instruction";

// Runs `fn` on every record into indexed slots, so the outcome is independent
// of scheduling. Library errors become per-record drops; nothing escapes.
template <typename Fn>
std::vector<Verdict> for_each_record(std::vector<TripletRecord>& records, int workers, bool parallel, Fn&& fn) {
  std::vector<Verdict> verdicts(records.size());
  const int threads = parallel ? resolve_workers(workers) : 1;
  #pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      verdicts[i] = fn(records[i]);
    } catch (const IoError& e) {
      verdicts[i] = Drop{kReasonUnreadable, e.what()};
    } catch (const ProviderError& e) {
      verdicts[i] = Drop{kReasonProviderError, e.what()};
    } catch (const std::exception& e) {
      verdicts[i] = Drop{"error", e.what()};
    }
  }
  return verdicts;
}

StageOutcome partition(std::vector<TripletRecord> records, const std::vector<Verdict>& verdicts, const char* stage,
                       Clock::time_point start) {
  StageOutcome out;
  out.report.stage = stage;
  out.report.input = records.size();
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& r = records[i];
    r.stage_verdicts[stage] = !verdicts[i].has_value();
    if (verdicts[i]) {
      ++out.report.reasons[verdicts[i]->reason];
      out.drops.push_back({r.id, stage, verdicts[i]->reason, verdicts[i]->detail});
    } else {
      out.kept.push_back(std::move(r));
    }
  }
  out.report.passed = out.kept.size();
  out.report.dropped = out.drops.size();
  out.report.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return out;
}

std::string score_key(const char* stage, const char* side, const std::string& metric) {
  return std::string(stage) + "." + side + "." + metric;
}

void store_measurements(TripletRecord& r, const char* side, const std::map<std::string, double>& m) {
  for (const auto& [k, v] : m) r.scores[score_key(kStageQuality, side, k)] = v;
}

std::map<std::string, double> load_measurements(const TripletRecord& r, const char* side) {
  std::map<std::string, double> m;
  const std::string prefix = std::string(kStageQuality) + "." + side + ".";
  for (const auto& [k, v] : r.scores) {
    if (k.rfind(prefix, 0) == 0) m[k.substr(prefix.size())] = v;
  }
  return m;
}

double aspect_ratio(int h, int w) {
  return static_cast<double>(std::max(h, w)) / static_cast<double>(std::min(h, w));
}

std::string ensure_edited_digest(TripletRecord& r, const std::string& algorithm) {
  if (r.digest_edited.empty()) r.digest_edited = hex_digest(read_file_bytes(r.edited_path), algorithm);
  return r.digest_edited;
}

}  // namespace

std::string instruction_key(const std::string& instruction, const std::string& digest_algorithm) {
  return hex_digest(std::string_view(instruction), digest_algorithm);
}

std::string crop_key(const std::string& digest_edited, const adherence::BoundingBox& box) {
  return digest_edited + "_crop_" + std::to_string(box.y0) + "_" + std::to_string(box.x0) + "_" +
         std::to_string(box.height) + "_" + std::to_string(box.width);
}

std::size_t retained_count(std::size_t n, double fraction) {
  const double k = std::ceil(fraction * static_cast<double>(n) - 1e-9);
  return std::min(n, static_cast<std::size_t>(std::max(0.0, k)));
}

double fallback_aesthetic(double tenengrad, double glcm_entropy, double mean_luminance, int glcm_levels) {
  const double sharp = tenengrad / (tenengrad + 0.1);
  const double max_entropy = std::log(static_cast<double>(glcm_levels) * glcm_levels);
  const double texture = std::clamp(glcm_entropy / max_entropy, 0.0, 1.0);
  const double exposure = std::clamp(1.0 - 2.0 * std::abs(mean_luminance - 0.5), 0.0, 1.0);
  return 0.4 * sharp + 0.3 * texture + 0.3 * exposure;
}

Providers make_providers(const PipelineConfig& cfg) {
  Providers p;
  p.crop_embeddings = curation::make_embedding_provider(cfg.adherence.crop_embeddings);
  if (!cfg.adherence.instruction_embeddings.empty()) {
    p.instruction_embeddings =
        std::make_shared<curation::DirectoryEmbeddingProvider>(cfg.adherence.instruction_embeddings);
  }
  return p;
}

StageOutcome stage_preliminary(std::vector<TripletRecord> records, const PipelineConfig& cfg) {
  const auto start = Clock::now();
  const double max_aspect = cfg.quality.thresholds.max_aspect_ratio;
  auto verdicts = for_each_record(records, cfg.workers, true, [&](TripletRecord& r) -> Verdict {
    const auto in_bytes = read_file_bytes(r.input_path);
    const auto ed_bytes = read_file_bytes(r.edited_path);
    const auto input = decode_image(in_bytes);
    const auto edited = decode_image(ed_bytes);
    r.digest_input = hex_digest(std::span<const std::uint8_t>(in_bytes), cfg.digest_algorithm);
    r.digest_edited = hex_digest(std::span<const std::uint8_t>(ed_bytes), cfg.digest_algorithm);
    r.height = input.height();
    r.width = input.width();
    if (std::min(in_bytes.size(), ed_bytes.size()) < cfg.preliminary.min_bytes) {
      return Drop{kReasonTooSmall, std::to_string(std::min(in_bytes.size(), ed_bytes.size())) + " bytes"};
    }
    if (input.height() != edited.height() || input.width() != edited.width()) {
      return Drop{kReasonDimensionMismatch, "input and edited sizes differ"};
    }
    const double ratio = aspect_ratio(input.height(), input.width());
    if (ratio > max_aspect) return Drop{kReasonAspectRatio, "aspect ratio " + std::to_string(ratio)};
    return std::nullopt;
  });

  // First occurrence wins, in manifest order.
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (verdicts[i]) continue;
    const auto key = records[i].digest_input + "|" + records[i].digest_edited;
    if (!seen.insert(key).second) verdicts[i] = Drop{kReasonDuplicate, "same content as an earlier record"};
  }
  return partition(std::move(records), verdicts, kStagePreliminary, start);
}

StageOutcome stage_quality(std::vector<TripletRecord> records, const PipelineConfig& cfg) {
  const auto start = Clock::now();
  const auto& qc = cfg.quality;
  auto verdicts = for_each_record(records, cfg.workers, true, [&](TripletRecord& r) -> Verdict {
    store_measurements(r, "input", quality::measure(read_image(r.input_path), qc.options));
    store_measurements(r, "edited", quality::measure(read_image(r.edited_path), qc.options));
    return std::nullopt;
  });

  auto thresholds = qc.thresholds;
  OJson notes = OJson::object();
  notes["sharpness_mode"] = qc.sharpness_mode == SharpnessMode::percentile ? "percentile" : "absolute";
  if (qc.sharpness_mode == SharpnessMode::percentile) {
    std::vector<double> values;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (verdicts[i]) continue;
      for (const char* side : {"input", "edited"}) {
        values.push_back(records[i].scores.at(score_key(kStageQuality, side, quality::kTenengrad)));
      }
    }
    std::sort(values.begin(), values.end());
    thresholds.min_sharpness = 0.0;
    if (!values.empty()) {
      const auto idx = static_cast<std::size_t>(std::floor(qc.sharpness_percentile / 100.0 * values.size()));
      thresholds.min_sharpness = values[std::min(idx, values.size() - 1)];
    }
    notes["sharpness_percentile"] = qc.sharpness_percentile;
  }
  notes["min_sharpness"] = thresholds.min_sharpness;

  for (std::size_t i = 0; i < records.size(); ++i) {
    if (verdicts[i]) continue;
    std::vector<std::string> failed;
    std::string detail;
    for (const char* side : {"input", "edited"}) {
      const auto v = quality::judge(load_measurements(records[i], side), thresholds);
      for (const auto& c : v.failed_checks) {
        failed.push_back(c);
        detail += (detail.empty() ? "" : "; ") + std::string(side) + ": " + c;
      }
    }
    if (failed.empty()) continue;
    for (const char* reason : kQualityPriority) {
      if (std::find(failed.begin(), failed.end(), reason) != failed.end()) {
        verdicts[i] = Drop{reason, detail};
        break;
      }
    }
    if (!verdicts[i]) verdicts[i] = Drop{failed.front(), detail};
  }
  auto out = partition(std::move(records), verdicts, kStageQuality, start);
  out.report.notes = notes;
  return out;
}

StageOutcome stage_adherence(std::vector<TripletRecord> records, const PipelineConfig& cfg, const Providers& providers) {
  const auto start = Clock::now();
  const auto& ac = cfg.adherence;
  if (!providers.crop_embeddings) throw ConfigError("adherence stage needs a crop embedding provider");
  const bool parallel = !providers.crop_embeddings->single_flight() &&
                        !(providers.instruction_embeddings && providers.instruction_embeddings->single_flight());
  auto verdicts = for_each_record(records, cfg.workers, parallel, [&](TripletRecord& r) -> Verdict {
    const auto input = read_image(r.input_path);
    const auto edited = read_image(r.edited_path);
    if (input.height() != edited.height() || input.width() != edited.width()) {
      return Drop{kReasonDimensionMismatch, "input and edited sizes differ"};
    }
    adherence::EditMask mask;
    if (r.mask_path) {
      mask = adherence::read_mask(*r.mask_path);
      if (mask.height != input.height() || mask.width != input.width()) {
        return Drop{kReasonDimensionMismatch, "mask size differs from the images"};
      }
    } else {
      mask = adherence::diff_mask(input, edited, ac.pixel_threshold, ac.morph_radius);
    }
    const auto edited_pixels = mask.count();
    r.scores["adherence.mask_fraction"] = static_cast<double>(edited_pixels) / static_cast<double>(input.pixel_count());
    if (edited_pixels == 0) return Drop{kReasonNoEdit, "empty edit mask"};

    const double distance = adherence::unedited_region_distance(input, edited, mask, ac.distance);
    r.scores["adherence.distance"] = distance;

    double alignment = 0.0;
    try {
      if (!providers.instruction_embeddings) throw ProviderError("no instruction embedding provider");
      const auto instr = providers.instruction_embeddings->embed(ImageTensor{}, instruction_key(r.instruction, cfg.digest_algorithm));
      const auto key = crop_key(ensure_edited_digest(r, cfg.digest_algorithm), adherence::mask_bounding_box(mask));
      alignment = adherence::edited_region_alignment(edited, mask, instr, *providers.crop_embeddings, key);
    } catch (const ProviderError& e) {
      if (!cfg.fail_open) return Drop{kReasonProviderError, e.what()};
      return std::nullopt;
    }
    r.scores["adherence.alignment"] = alignment;

    if (alignment < ac.min_alignment) return Drop{kReasonLowAlignment, "alignment " + std::to_string(alignment)};
    if (distance > ac.max_distance) return Drop{kReasonPoorPreservation, "distance " + std::to_string(distance)};
    return std::nullopt;
  });
  auto out = partition(std::move(records), verdicts, kStageAdherence, start);
  out.report.notes["alignment_mode"] = kAlignmentMode;
  out.report.notes["crop_embeddings"] = providers.crop_embeddings->identity();
  return out;
}

StageOutcome stage_aesthetic(std::vector<TripletRecord> records, const PipelineConfig& cfg) {
  const auto start = Clock::now();
  const auto& ac = cfg.aesthetic;
  const auto provider_score = [&](const TripletRecord& r) -> std::optional<double> {
    double sum = 0.0;
    int n = 0;
    for (const auto& [name, scale] : ac.providers) {
      if (const auto it = r.scores.find(name); it != r.scores.end()) {
        sum += it->second * scale;
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return sum / n;
  };
  const bool any_provider = std::any_of(records.begin(), records.end(),
                                        [&](const TripletRecord& r) { return provider_score(r).has_value(); });

  auto verdicts = for_each_record(records, cfg.workers, true, [&](TripletRecord& r) -> Verdict {
    std::optional<double> score = provider_score(r);
    if (!score && any_provider && !cfg.fail_open) return Drop{kReasonProviderError, "no aesthetic provider score"};
    const bool composite = ac.ranking == RankingMode::composite;
    auto m = load_measurements(r, "edited");
    if ((!score || composite) && !m.contains(quality::kTenengrad)) {
      m = quality::measure(read_image(r.edited_path), cfg.quality.options);
      store_measurements(r, "edited", m);
    }
    if (!score) {
      score = fallback_aesthetic(m.at(quality::kTenengrad), m.at(quality::kGlcmEntropy), m.at(quality::kMeanLuminance),
                                 cfg.quality.options.glcm_levels);
    }
    r.scores["aesthetic.score"] = *score;
    double rank = *score;
    if (composite) {
      double sum = *score;
      int n = 1;
      if (const auto it = r.scores.find("adherence.alignment"); it != r.scores.end()) {
        sum += std::clamp(it->second, 0.0, 1.0);
        ++n;
      }
      const double t = m.at(quality::kTenengrad);
      sum += t / (t + 0.1);
      ++n;
      rank = sum / n;
    }
    r.scores["aesthetic.rank_score"] = rank;
    return std::nullopt;
  });

  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!verdicts[i]) eligible.push_back(i);
  }
  std::sort(eligible.begin(), eligible.end(), [&](std::size_t a, std::size_t b) {
    const double sa = records[a].scores.at("aesthetic.rank_score"), sb = records[b].scores.at("aesthetic.rank_score");
    if (sa != sb) return sa > sb;
    return records[a].id < records[b].id;
  });
  const std::size_t keep = retained_count(eligible.size(), cfg.retention_fraction);
  for (std::size_t rank = keep; rank < eligible.size(); ++rank) {
    verdicts[eligible[rank]] = Drop{kReasonBelowRetention, "rank " + std::to_string(rank + 1)};
  }
  auto out = partition(std::move(records), verdicts, kStageAesthetic, start);
  out.report.notes["score_source"] = any_provider ? "providers" : "fallback_composite";
  out.report.notes["fallback_composite_used"] = !any_provider;
  out.report.notes["ranking"] = ac.ranking == RankingMode::aesthetic ? "aesthetic" : "composite";
  out.report.notes["retention_fraction"] = cfg.retention_fraction;
  out.report.notes["retained"] = keep;
  return out;
}

StageOutcome run_stage(const std::string& name, std::vector<TripletRecord> records, const PipelineConfig& cfg,
                       const Providers& providers) {
  if (name == kStagePreliminary) return stage_preliminary(std::move(records), cfg);
  if (name == kStageQuality) return stage_quality(std::move(records), cfg);
  if (name == kStageAdherence) return stage_adherence(std::move(records), cfg, providers);
  if (name == kStageAesthetic) return stage_aesthetic(std::move(records), cfg);
  throw ConfigError("unknown stage \"" + name + "\"");
}

PipelineResult run_pipeline(std::vector<TripletRecord> records, const PipelineConfig& cfg, const Providers& providers) {
  cfg.validate();
  PipelineResult result;
  const std::pair<const char*, bool> order[] = {{kStagePreliminary, cfg.stages.preliminary},
                                                {kStageQuality, cfg.stages.quality},
                                                {kStageAdherence, cfg.stages.adherence},
                                                {kStageAesthetic, cfg.stages.aesthetic}};
  for (const auto& [name, enabled] : order) {
    if (!enabled) continue;
    auto out = run_stage(name, std::move(records), cfg, providers);
    records = std::move(out.kept);
    result.stages.push_back(std::move(out.report));
    std::move(out.drops.begin(), out.drops.end(), std::back_inserter(result.drops));
  }
  result.kept = std::move(records);
  return result;
}

OJson stage_report_json(const StageReport& r) {
  OJson reasons = OJson::object();
  for (const auto& [k, v] : r.reasons) reasons[k] = v;
  OJson j;
  j["stage"] = r.stage;
  j["input"] = r.input;
  j["passed"] = r.passed;
  j["dropped"] = r.dropped;
  j["reasons"] = reasons;
  j["wall_seconds"] = r.wall_seconds;
  j["notes"] = r.notes;
  return j;
}

OJson PipelineResult::report(const PipelineConfig& cfg) const {
  OJson j;
  j["config"] = config_to_json(cfg);
  j["input"] = stages.empty() ? kept.size() : stages.front().input;
  j["kept"] = kept.size();
  OJson st = OJson::array();
  for (const auto& s : stages) st.push_back(stage_report_json(s));
  j["stages"] = st;
  OJson d = OJson::array();
  for (const auto& x : drops) d.push_back({{"id", x.id}, {"stage", x.stage}, {"reason", x.reason}, {"detail", x.detail}});
  j["drops"] = d;
  OJson ids = OJson::array();
  for (const auto& r : kept) ids.push_back(r.id);
  j["kept_ids"] = ids;
  return j;
}

}  // namespace uhredit::pipeline

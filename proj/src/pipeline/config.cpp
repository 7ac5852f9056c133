// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#include "uhredit/pipeline/config.hpp"

#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <set>
#include <type_traits>

#include "uhredit/digest.hpp"

namespace uhredit::pipeline {

namespace {

using Json = nlohmann::json;
using OJson = nlohmann::ordered_json;

// Reads the keys of one JSON object and rejects any it did not consume.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.contains(k)) throw ConfigError(path_ + "." + k + ": unknown key");
    }
  }

  const Json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string where(const std::string& key) const { return path_ + "." + key; }

  void number(const std::string& key, double& out) {
    if (const auto* v = find(key)) {
      if (!v->is_number()) throw ConfigError(where(key) + ": expected a number");
      out = v->get<double>();
    }
  }
  template <typename Int>
  void integer(const std::string& key, Int& out) {
    if (const auto* v = find(key)) {
      if (!v->is_number_integer()) throw ConfigError(where(key) + ": expected an integer");
      if constexpr (std::is_unsigned_v<Int>) {
        if (v->get<long long>() < 0) throw ConfigError(where(key) + ": expected a nonnegative integer");
      }
      out = v->get<Int>();
    }
  }
  void boolean(const std::string& key, bool& out) {
    if (const auto* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(where(key) + ": expected a boolean");
      out = v->get<bool>();
    }
  }
  void string(const std::string& key, std::string& out) {
    if (const auto* v = find(key)) {
      if (!v->is_string()) throw ConfigError(where(key) + ": expected a string");
      out = v->get<std::string>();
    }
  }
  void range(const std::string& key, quality::Range& out) {
    if (const auto* v = find(key)) {
      if (!v->is_array() || v->size() != 2) throw ConfigError(where(key) + ": expected [low, high]");
      const auto bound = [&](const Json& b, double inf) {
        if (b.is_null()) return inf;
        if (!b.is_number()) throw ConfigError(where(key) + ": bounds must be numbers or null");
        return b.get<double>();
      };
      out.low = bound((*v)[0], -std::numeric_limits<double>::infinity());
      out.high = bound((*v)[1], std::numeric_limits<double>::infinity());
    }
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Json range_json(const quality::Range& r) {
  const auto b = [](double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); };
  return Json::array({b(r.low), b(r.high)});
}

template <typename Enum>
Enum parse_enum(Section& s, const std::string& key, Enum current,
                std::initializer_list<std::pair<const char*, Enum>> names) {
  std::string name;
  s.string(key, name);
  if (name.empty()) return current;
  for (const auto& [n, e] : names) {
    if (name == n) return e;
  }
  throw ConfigError(s.where(key) + ": unsupported value \"" + name + "\"");
}

void parse_quality(const Json& j, QualityStageConfig& q) {
  Section s(j, "quality");
  q.sharpness_mode = parse_enum(s, "sharpness_mode", q.sharpness_mode,
                                {{"percentile", SharpnessMode::percentile}, {"absolute", SharpnessMode::absolute}});
  s.number("sharpness_percentile", q.sharpness_percentile);
  if (const auto* v = s.find("min_sharpness")) {
    if (!v->is_number()) throw ConfigError("quality.min_sharpness: expected a number");
    q.thresholds.min_sharpness = v->get<double>();
    // An explicit absolute threshold selects absolute mode unless a mode is named.
    if (!j.contains("sharpness_mode")) q.sharpness_mode = SharpnessMode::absolute;
  }
  s.range("luminance_range", q.thresholds.luminance_range);
  s.range("saturation_range", q.thresholds.saturation_range);
  if (const auto* tb = s.find("texture_bounds")) {
    Section t(*tb, "quality.texture_bounds");
    t.range("contrast", q.thresholds.texture_bounds.contrast);
    t.range("energy", q.thresholds.texture_bounds.energy);
    t.range("homogeneity", q.thresholds.texture_bounds.homogeneity);
    t.range("entropy", q.thresholds.texture_bounds.entropy);
  }
  s.integer("glcm_levels", q.options.glcm_levels);
  if (const auto* offs = s.find("glcm_offsets")) {
    if (!offs->is_array() || offs->empty()) throw ConfigError("quality.glcm_offsets: expected [[dy, dx], ...]");
    q.options.glcm_offsets.clear();
    for (const auto& o : *offs) {
      if (!o.is_array() || o.size() != 2 || !o[0].is_number_integer() || !o[1].is_number_integer()) {
        throw ConfigError("quality.glcm_offsets: expected [[dy, dx], ...]");
      }
      q.options.glcm_offsets.push_back({o[0].get<int>(), o[1].get<int>()});
    }
  }
  s.integer("tile_size", q.options.tile_size);
}

void parse_adherence(const Json& j, AdherenceStageConfig& a) {
  Section s(j, "adherence");
  s.number("pixel_threshold", a.pixel_threshold);
  s.integer("morph_radius", a.morph_radius);
  s.number("min_alignment", a.min_alignment);
  s.number("max_distance", a.max_distance);
  a.distance = parse_enum(s, "distance", a.distance,
                          {{"rms", adherence::DistanceMode::rms}, {"l2", adherence::DistanceMode::l2}});
  s.string("instruction_embeddings", a.instruction_embeddings);
  s.string("crop_embeddings", a.crop_embeddings);
}

void parse_aesthetic(const Json& j, AestheticStageConfig& a) {
  Section s(j, "aesthetic");
  a.ranking = parse_enum(s, "ranking", a.ranking,
                         {{"aesthetic", RankingMode::aesthetic}, {"composite", RankingMode::composite}});
  if (const auto* p = s.find("providers")) {
    if (!p->is_object() || p->empty()) throw ConfigError("aesthetic.providers: expected {name: scale, ...}");
    a.providers.clear();
    for (const auto& [name, scale] : p->items()) {
      if (!scale.is_number() || !(scale.get<double>() > 0.0)) {
        throw ConfigError("aesthetic.providers." + name + ": scale must be a positive number");
      }
      a.providers.emplace_back(name, scale.get<double>());
    }
  }
}

void parse_pairs(const Json& j, PairStageConfig& p) {
  Section s(j, "pairs");
  auto& m = p.mining;
  s.number("scene_threshold", m.scene_threshold);
  s.integer("min_clip_len", m.min_clip_len);
  s.integer("frame_stride", m.frame_stride);
  s.integer("max_gap", m.max_gap);
  s.number("sim_high", m.thresholds.sim_high);
  s.number("sim_low", m.thresholds.sim_low);
  s.number("motion_low", m.thresholds.motion_low);
  s.number("motion_high", m.thresholds.motion_high);
  p.order = parse_enum(s, "order", p.order,
                       {{"quality_first", PairFilterOrder::quality_first}, {"pairs_first", PairFilterOrder::pairs_first}});
  s.string("embeddings", p.embeddings);
  s.string("flow", p.flow);
}

const char* name(SharpnessMode m) { return m == SharpnessMode::percentile ? "percentile" : "absolute"; }
const char* name(RankingMode m) { return m == RankingMode::aesthetic ? "aesthetic" : "composite"; }
const char* name(PairFilterOrder o) { return o == PairFilterOrder::quality_first ? "quality_first" : "pairs_first"; }
const char* name(adherence::DistanceMode m) { return m == adherence::DistanceMode::rms ? "rms" : "l2"; }

}  // namespace

void PipelineConfig::validate() const {
  if (!(retention_fraction > 0.0 && retention_fraction <= 1.0)) throw ConfigError("retention_fraction must lie in (0, 1]");
  if (!is_supported_digest(digest_algorithm)) throw ConfigError("unsupported digest_algorithm \"" + digest_algorithm + "\"");
  if (workers < 0) throw ConfigError("workers must be >= 0");
  try {
    quality.thresholds.validate();
    pairs.mining.thresholds.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  if (!(quality.sharpness_percentile >= 0.0 && quality.sharpness_percentile < 100.0)) {
    throw ConfigError("quality.sharpness_percentile must lie in [0, 100)");
  }
  if (quality.options.glcm_levels < 2) throw ConfigError("quality.glcm_levels must be >= 2");
  if (quality.options.tile_size < 0) throw ConfigError("quality.tile_size must be >= 0");
  for (const auto& o : quality.options.glcm_offsets) {
    if (o.dy == 0 && o.dx == 0) throw ConfigError("quality.glcm_offsets: offsets must be nonzero");
  }
  if (!(adherence.pixel_threshold >= 0.0 && adherence.pixel_threshold < 1.0)) {
    throw ConfigError("adherence.pixel_threshold must lie in [0, 1)");
  }
  if (adherence.morph_radius < 0) throw ConfigError("adherence.morph_radius must be >= 0");
  if (!(adherence.max_distance >= 0.0)) throw ConfigError("adherence.max_distance must be >= 0");
  if (stages.adherence && adherence.instruction_embeddings.empty()) {
    throw ConfigError("adherence.instruction_embeddings must name an EMB1 directory when the adherence stage is on");
  }
  if (stages.adherence && !std::filesystem::is_directory(adherence.instruction_embeddings)) {
    throw ConfigError("adherence.instruction_embeddings is not a directory: " + adherence.instruction_embeddings);
  }
  if (adherence.crop_embeddings != "builtin" && !std::filesystem::is_directory(adherence.crop_embeddings)) {
    throw ConfigError("adherence.crop_embeddings must be \"builtin\" or a directory");
  }
  if (pairs.mining.frame_stride < 1 || pairs.mining.max_gap < 1) throw ConfigError("pairs.frame_stride and max_gap must be >= 1");
}

PipelineConfig config_from_json(const Json& j) {
  PipelineConfig cfg;
  {
    Section s(j, "config");
    if (const auto* st = s.find("stages")) {
      Section t(*st, "stages");
      t.boolean(kStagePreliminary, cfg.stages.preliminary);
      t.boolean(kStageQuality, cfg.stages.quality);
      t.boolean(kStageAdherence, cfg.stages.adherence);
      t.boolean(kStageAesthetic, cfg.stages.aesthetic);
    }
    if (const auto* p = s.find("preliminary")) {
      Section t(*p, "preliminary");
      t.integer("min_bytes", cfg.preliminary.min_bytes);
    }
    if (const auto* q = s.find("quality")) parse_quality(*q, cfg.quality);
    if (const auto* a = s.find("adherence")) parse_adherence(*a, cfg.adherence);
    if (const auto* a = s.find("aesthetic")) parse_aesthetic(*a, cfg.aesthetic);
    if (const auto* p = s.find("pairs")) parse_pairs(*p, cfg.pairs);
    s.number("max_aspect_ratio", cfg.quality.thresholds.max_aspect_ratio);
    s.number("retention_fraction", cfg.retention_fraction);
    s.string("digest_algorithm", cfg.digest_algorithm);
    s.integer("workers", cfg.workers);
    s.integer("seed", cfg.seed);
    s.boolean("fail_open", cfg.fail_open);
  }
  cfg.validate();
  return cfg;
}

OJson config_to_json(const PipelineConfig& cfg) {
  OJson j;
  j["stages"] = {{kStagePreliminary, cfg.stages.preliminary},
                 {kStageQuality, cfg.stages.quality},
                 {kStageAdherence, cfg.stages.adherence},
                 {kStageAesthetic, cfg.stages.aesthetic}};
  j["preliminary"] = {{"min_bytes", cfg.preliminary.min_bytes}};
  const auto& q = cfg.quality;
  OJson offsets = OJson::array();
  for (const auto& o : q.options.glcm_offsets) offsets.push_back({o.dy, o.dx});
  j["quality"] = {{"sharpness_mode", name(q.sharpness_mode)},
                  {"sharpness_percentile", q.sharpness_percentile},
                  {"min_sharpness", q.thresholds.min_sharpness},
                  {"luminance_range", range_json(q.thresholds.luminance_range)},
                  {"saturation_range", range_json(q.thresholds.saturation_range)},
                  {"texture_bounds",
                   {{"contrast", range_json(q.thresholds.texture_bounds.contrast)},
                    {"energy", range_json(q.thresholds.texture_bounds.energy)},
                    {"homogeneity", range_json(q.thresholds.texture_bounds.homogeneity)},
                    {"entropy", range_json(q.thresholds.texture_bounds.entropy)}}},
                  {"glcm_levels", q.options.glcm_levels},
                  {"glcm_offsets", offsets},
                  {"tile_size", q.options.tile_size}};
  const auto& a = cfg.adherence;
  j["adherence"] = {{"pixel_threshold", a.pixel_threshold},
                    {"morph_radius", a.morph_radius},
                    {"min_alignment", a.min_alignment},
                    {"max_distance", a.max_distance},
                    {"distance", name(a.distance)},
                    {"instruction_embeddings", a.instruction_embeddings},
                    {"crop_embeddings", a.crop_embeddings}};
  OJson providers = OJson::object();
  for (const auto& [n, scale] : cfg.aesthetic.providers) providers[n] = scale;
  j["aesthetic"] = {{"ranking", name(cfg.aesthetic.ranking)}, {"providers", providers}};
  const auto& m = cfg.pairs.mining;
  j["pairs"] = {{"scene_threshold", m.scene_threshold},
                {"min_clip_len", m.min_clip_len},
                {"frame_stride", m.frame_stride},
                {"max_gap", m.max_gap},
                {"sim_high", m.thresholds.sim_high},
                {"sim_low", m.thresholds.sim_low},
                {"motion_low", m.thresholds.motion_low},
                {"motion_high", m.thresholds.motion_high},
                {"order", name(cfg.pairs.order)},
                {"embeddings", cfg.pairs.embeddings},
                {"flow", cfg.pairs.flow}};
  j["max_aspect_ratio"] = q.thresholds.max_aspect_ratio;
  j["retention_fraction"] = cfg.retention_fraction;
  j["digest_algorithm"] = cfg.digest_algorithm;
  j["workers"] = cfg.workers;
  j["seed"] = cfg.seed;
  j["fail_open"] = cfg.fail_open;
  return j;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  // Directory references are relative to the config file.
  if (auto a = j.find("adherence"); a != j.end() && a->is_object()) {
    for (const char* key : {"instruction_embeddings", "crop_embeddings"}) {
      auto v = a->find(key);
      if (v == a->end() || !v->is_string()) continue;
      const std::string s = v->get<std::string>();
      if (s.empty() || s == "builtin" || std::filesystem::path(s).is_absolute()) continue;
      *v = (path.parent_path() / s).lexically_normal().string();
    }
  }
  return config_from_json(j);
}

}  // namespace uhredit::pipeline

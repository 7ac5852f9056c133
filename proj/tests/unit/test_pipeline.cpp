// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include <algorithm>
#include <fstream>
#include <set>

#include "fixtures.hpp"
#include "uhredit/pipeline/config.hpp"
#include "uhredit/pipeline/manifest.hpp"
#include "uhredit/pipeline/pipeline.hpp"

using namespace uhredit;
using namespace uhredit::pipeline;
namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary) << s;
}

std::set<std::string> ids_of(const std::vector<TripletRecord>& rs) {
  std::set<std::string> s;
  for (const auto& r : rs) s.insert(r.id);
  return s;
}

TripletRecord record(const std::string& id, const fs::path& in, const fs::path& ed) {
  TripletRecord r;
  r.id = id;
  r.input_path = in;
  r.edited_path = ed;
  r.instruction = "do something";
  return r;
}

PipelineConfig no_adherence() {
  PipelineConfig cfg;
  cfg.stages.adherence = false;
  return cfg;
}

}  // namespace

TEST_CASE("manifest load and round trip") {
  const auto dir = testing::scratch_dir("manifest");
  write_text(dir / "empty.jsonl", "");
  CHECK(load_manifest(dir / "empty.jsonl").empty());

  write_text(dir / "m.jsonl",
             R"({"id":"a","input_path":"x/in.png","edited_path":"x/ed.png","instruction":"add a hat","edit_type":"object_addition","scores":{"laion_aesthetic":6.5},"custom":{"k":[1,2]}})"
             "\n\n"
             R"({"id":"b","input_path":"/abs/in.png","edited_path":"/abs/ed.png","instruction":"make it red","stage_verdicts":{"quality":"pass"},"width":64,"height":32})"
             "\n");
  const auto rs = load_manifest(dir / "m.jsonl");
  REQUIRE(rs.size() == 2);
  CHECK(rs[0].input_path == (dir / "x/in.png").lexically_normal());
  CHECK(rs[0].extra["custom"]["k"][1] == 2);
  CHECK(rs[1].edit_type == "unknown");
  CHECK(rs[1].stage_verdicts.at("quality"));

  write_manifest(dir / "out.jsonl", rs);
  CHECK(load_manifest(dir / "out.jsonl") == rs);
  CHECK_FALSE(fs::exists(dir / ("out.jsonl.tmp")));

  write_text(dir / "bad.jsonl",
             R"({"id":"a","input_path":"i","edited_path":"e","instruction":"x"})"
             "\n"
             R"({"id":"b","input_path":"i","edited_path":"e"})"
             "\n");
  try {
    load_manifest(dir / "bad.jsonl");
    FAIL("expected ManifestError");
  } catch (const ManifestError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("instruction") != std::string::npos);
  }
  write_text(dir / "garbage.jsonl", "{not json\n");
  CHECK_THROWS_AS(load_manifest(dir / "garbage.jsonl"), ManifestError);
  write_text(dir / "dup.jsonl",
             R"({"id":"a","input_path":"i","edited_path":"e","instruction":"x"})"
             "\n"
             R"({"id":"a","input_path":"i","edited_path":"e","instruction":"y"})"
             "\n");
  CHECK_THROWS_AS(load_manifest(dir / "dup.jsonl"), ManifestError);
  write_text(dir / "type.jsonl", R"({"id":"a","input_path":"i","edited_path":"e","instruction":"x","edit_type":"teleport"})" "\n");
  CHECK_THROWS_AS(load_manifest(dir / "type.jsonl"), ManifestError);
  CHECK_THROWS_AS(load_manifest(dir / "missing.jsonl"), IoError);
}

TEST_CASE("config parsing") {
  const auto dir = testing::scratch_dir("config");
  fs::create_directories(dir / "emb");
  write_text(dir / "cfg.json", R"({"quality":{"min_sharpness":0.3},"adherence":{"instruction_embeddings":"emb"},
                                   "retention_fraction":0.5,"max_aspect_ratio":3})");
  const PipelineConfig cfg = load_config(dir / "cfg.json");
  CHECK(cfg.quality.sharpness_mode == SharpnessMode::absolute);
  CHECK(cfg.quality.thresholds.min_sharpness == 0.3);
  CHECK(cfg.quality.thresholds.max_aspect_ratio == 3.0);
  CHECK(cfg.retention_fraction == 0.5);
  CHECK(fs::path(cfg.adherence.instruction_embeddings) == (dir / "emb").lexically_normal());
  CHECK_NOTHROW(cfg.validate());

  // The effective config round-trips through its JSON form.
  const PipelineConfig again = config_from_json(nlohmann::json::parse(config_to_json(cfg).dump()));
  CHECK(nlohmann::json(config_to_json(again)) == nlohmann::json(config_to_json(cfg)));

  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"bogus":1})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"quality":{"min_sharpnes":1}})")), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"retention_fraction":"high"})")), ConfigError);
  PipelineConfig bad = no_adherence();
  bad.retention_fraction = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad.retention_fraction = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(PipelineConfig{}.validate(), ConfigError);  // adherence needs instruction embeddings
  write_text(dir / "broken.json", "{");
  CHECK_THROWS_AS(load_config(dir / "broken.json"), ConfigError);
}

TEST_CASE("retention count and fallback score") {
  CHECK(retained_count(100, 0.2) == 20);
  CHECK(retained_count(120, 0.2) == 24);
  CHECK(retained_count(7, 0.2) == 2);
  CHECK(retained_count(5, 1.0) == 5);
  CHECK(retained_count(0, 0.2) == 0);
  const double f = fallback_aesthetic(0.1, 0.5 * std::log(256.0), 0.5, 16);
  CHECK(f == doctest::Approx(0.4 * 0.5 + 0.3 * 0.5 + 0.3));
  CHECK(fallback_aesthetic(0.0, 0.0, 1.0, 16) == 0.0);
}

TEST_CASE("preliminary stage") {
  const auto dir = testing::scratch_dir("prelim");
  const ImageTensor a = testing::noisy_rgb(128, 128, 1);
  const ImageTensor b = testing::noisy_rgb(128, 128, 2);
  write_png(dir / "a.png", a);
  write_png(dir / "b.png", b);
  fs::copy_file(dir / "a.png", dir / "a_copy.png");
  write_png(dir / "wide.png", testing::noisy_rgb(100, 500, 3));
  write_png(dir / "wide2.png", testing::noisy_rgb(100, 500, 4));
  write_png(dir / "small.png", ImageTensor::filled(128, 128, 3, 0.5f));
  write_png(dir / "other_size.png", testing::noisy_rgb(120, 128, 5));
  {
    const auto bytes = read_file_bytes(dir / "b.png");
    std::ofstream(dir / "trunc.png", std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()), 40000);
  }

  std::vector<TripletRecord> rs{record("ok", dir / "a.png", dir / "b.png"),
                                record("dup", dir / "a_copy.png", dir / "b.png"),
                                record("wide", dir / "wide.png", dir / "wide2.png"),
                                record("trunc", dir / "a.png", dir / "trunc.png"),
                                record("missing", dir / "a.png", dir / "nope.png"),
                                record("small", dir / "small.png", dir / "b.png"),
                                record("mismatch", dir / "a.png", dir / "other_size.png")};
  const StageOutcome out = stage_preliminary(rs, no_adherence());
  CHECK(ids_of(out.kept) == std::set<std::string>{"ok"});
  std::map<std::string, std::string> reason;
  for (const auto& d : out.drops) reason[d.id] = d.reason;
  CHECK(reason["dup"] == kReasonDuplicate);
  CHECK(reason["wide"] == kReasonAspectRatio);
  CHECK(reason["trunc"] == kReasonUnreadable);
  CHECK(reason["missing"] == kReasonUnreadable);
  CHECK(reason["small"] == kReasonTooSmall);
  CHECK(reason["mismatch"] == kReasonDimensionMismatch);
  CHECK(out.report.input == out.report.passed + out.report.dropped);
  CHECK(out.kept[0].digest_input.size() == 32);
  CHECK(out.kept[0].width == 128);
  CHECK(out.kept[0].stage_verdicts.at(kStagePreliminary));
}

TEST_CASE("quality stage drops an all-white edit for exposure") {
  const auto dir = testing::scratch_dir("quality_stage");
  write_png(dir / "in.png", testing::noisy_rgb(96, 96, 1));
  write_png(dir / "white.png", ImageTensor::filled(96, 96, 3, 1.0f));
  write_png(dir / "ed.png", testing::noisy_rgb(96, 96, 2));
  PipelineConfig cfg = no_adherence();
  cfg.quality.sharpness_mode = SharpnessMode::absolute;
  cfg.quality.thresholds.min_sharpness = 0.01;
  const auto out = stage_quality({record("w", dir / "in.png", dir / "white.png"), record("k", dir / "in.png", dir / "ed.png")}, cfg);
  REQUIRE(out.drops.size() == 1);
  CHECK(out.drops[0].id == "w");
  CHECK(out.drops[0].reason == quality::kCheckExposure);
  REQUIRE(out.kept.size() == 1);
  CHECK(out.kept[0].scores.count("quality.edited.tenengrad") == 1);
  CHECK(out.kept[0].scores.count("quality.input.mean_luminance") == 1);
}

TEST_CASE("aesthetic retention keeps the top fraction with id tie-breaks") {
  std::vector<TripletRecord> rs;
  for (int i = 0; i < 100; ++i) {
    TripletRecord r = record("id" + std::to_string(1000 + i), "in", "ed");
    r.scores["laion_aesthetic"] = (i % 40) * 0.25;  // many ties
    rs.push_back(r);
  }
  PipelineConfig cfg = no_adherence();
  const auto out = stage_aesthetic(rs, cfg);
  REQUIRE(out.kept.size() == 20);
  std::vector<TripletRecord> sorted = rs;
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) {
    const double a = x.scores.at("laion_aesthetic"), b = y.scores.at("laion_aesthetic");
    return a != b ? a > b : x.id < y.id;
  });
  std::set<std::string> want;
  for (int i = 0; i < 20; ++i) want.insert(sorted[i].id);
  CHECK(ids_of(out.kept) == want);
  CHECK(out.report.reasons.at(kReasonBelowRetention) == 80);
}

TEST_CASE("run_pipeline on a planted corpus") {
  auto corpus = testing::make_planted_corpus("pipeline_unit", 40);
  auto records = load_manifest(corpus.manifest);
  const Providers providers = make_providers(corpus.config);

  const PipelineResult res = run_pipeline(records, corpus.config, providers);
  std::map<std::string, std::pair<std::string, std::string>> dropped;
  for (const auto& d : res.drops) dropped[d.id] = {d.stage, d.reason};
  for (const auto& id : corpus.blurred) CHECK(dropped[id] == std::pair<std::string, std::string>{kStageQuality, quality::kCheckSharpness});
  for (const auto& id : corpus.overexposed) CHECK(dropped[id] == std::pair<std::string, std::string>{kStageQuality, quality::kCheckExposure});
  for (const auto& id : corpus.duplicates) CHECK(dropped[id] == std::pair<std::string, std::string>{kStagePreliminary, kReasonDuplicate});
  for (const auto& id : corpus.unedited) CHECK(dropped[id] == std::pair<std::string, std::string>{kStageAdherence, kReasonNoEdit});
  CHECK(res.kept.size() == retained_count(corpus.clean.size(), 0.2));

  // Each stage's input is exactly the previous stage's survivors.
  for (std::size_t i = 1; i < res.stages.size(); ++i) CHECK(res.stages[i].input == res.stages[i - 1].passed);
  for (const auto& s : res.stages) CHECK(s.input == s.passed + s.dropped);

  // All-passing corpus with full retention keeps everything.
  PipelineConfig keep_all = corpus.config;
  keep_all.retention_fraction = 1.0;
  std::vector<TripletRecord> clean;
  for (const auto& r : records)
    if (corpus.clean.contains(r.id)) clean.push_back(r);
  CHECK(ids_of(run_pipeline(clean, keep_all, providers).kept) == corpus.clean);

  // Tightening a threshold never grows the kept set.
  PipelineConfig tight = keep_all;
  tight.quality.thresholds.luminance_range = {0.49, 0.51};
  tight.adherence.max_distance = 0.0;
  const auto loose_ids = ids_of(run_pipeline(records, keep_all, providers).kept);
  const auto tight_ids = ids_of(run_pipeline(records, tight, providers).kept);
  CHECK(std::includes(loose_ids.begin(), loose_ids.end(), tight_ids.begin(), tight_ids.end()));

  // Determinism, including per-record scores.
  const PipelineResult again = run_pipeline(records, corpus.config, providers);
  REQUIRE(again.kept.size() == res.kept.size());
  for (std::size_t i = 0; i < res.kept.size(); ++i) CHECK(again.kept[i] == res.kept[i]);

  const auto report = res.report(corpus.config);
  CHECK(report["stages"].size() == 4);
  CHECK(report.contains("config"));
}

TEST_CASE("adherence stage failure handling") {
  auto corpus = testing::make_planted_corpus("pipeline_fail", 10);
  auto records = load_manifest(corpus.manifest);
  PipelineConfig cfg = corpus.config;
  const auto empty = testing::scratch_dir("pipeline_fail_emb");
  cfg.adherence.instruction_embeddings = empty.string();
  const Providers providers = make_providers(cfg);
  std::vector<TripletRecord> clean;
  for (const auto& r : records)
    if (corpus.clean.contains(r.id)) clean.push_back(r);
  const auto closed = stage_adherence(clean, cfg, providers);
  CHECK(closed.kept.empty());
  CHECK(closed.report.reasons.at(kReasonProviderError) == clean.size());
  cfg.fail_open = true;
  CHECK(stage_adherence(clean, cfg, providers).kept.size() == clean.size());
  CHECK_THROWS_AS(run_stage("sharpen", clean, cfg, providers), ConfigError);
}

// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#include "uhredit/pipeline/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <unistd.h>

namespace uhredit::pipeline {

namespace {

using Json = nlohmann::ordered_json;

const std::set<std::string, std::less<>> kKnownFields{
    "id",     "input_path", "edited_path", "instruction", "edit_type",     "width",         "height",
    "mask_path", "scores",  "stage_verdicts", "digest_input", "digest_edited"};

std::string require_string(const Json& j, const char* field) {
  const auto it = j.find(field);
  if (it == j.end()) throw InvalidArgument(std::string("missing required field \"") + field + "\"");
  if (!it->is_string()) throw InvalidArgument(std::string("field \"") + field + "\" must be a string");
  return it->get<std::string>();
}

std::filesystem::path resolve(const std::string& p, const std::filesystem::path& base) {
  std::filesystem::path path(p);
  if (path.is_relative()) path = base / path;
  return std::filesystem::absolute(path).lexically_normal();
}

std::optional<int> optional_int(const Json& j, const char* field) {
  const auto it = j.find(field);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number_integer() || it->get<long long>() < 1) {
    throw InvalidArgument(std::string("field \"") + field + "\" must be a positive integer");
  }
  return it->get<int>();
}

}  // namespace

bool is_edit_type(std::string_view s) {
  return std::find(kEditTypes.begin(), kEditTypes.end(), s) != kEditTypes.end();
}

TripletRecord record_from_json(const Json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw InvalidArgument("record must be a JSON object");
  TripletRecord r;
  r.id = require_string(j, "id");
  if (r.id.empty()) throw InvalidArgument("field \"id\" must be nonempty");
  r.input_path = resolve(require_string(j, "input_path"), base_dir);
  r.edited_path = resolve(require_string(j, "edited_path"), base_dir);
  r.instruction = require_string(j, "instruction");
  if (j.contains("edit_type")) {
    r.edit_type = require_string(j, "edit_type");
    if (!is_edit_type(r.edit_type)) throw InvalidArgument("unknown edit_type \"" + r.edit_type + "\"");
  }
  r.width = optional_int(j, "width");
  r.height = optional_int(j, "height");
  if (const auto it = j.find("mask_path"); it != j.end() && !it->is_null()) {
    r.mask_path = resolve(require_string(j, "mask_path"), base_dir);
  }
  if (const auto it = j.find("scores"); it != j.end()) {
    if (!it->is_object()) throw InvalidArgument("field \"scores\" must be an object");
    for (const auto& [k, v] : it->items()) {
      if (!v.is_number()) throw InvalidArgument("score \"" + k + "\" must be a number");
      r.scores[k] = v.get<double>();
    }
  }
  if (const auto it = j.find("stage_verdicts"); it != j.end()) {
    if (!it->is_object()) throw InvalidArgument("field \"stage_verdicts\" must be an object");
    for (const auto& [k, v] : it->items()) {
      if (!v.is_string() || (v != "pass" && v != "fail")) {
        throw InvalidArgument("stage verdict \"" + k + "\" must be \"pass\" or \"fail\"");
      }
      r.stage_verdicts[k] = v == "pass";
    }
  }
  if (j.contains("digest_input")) r.digest_input = require_string(j, "digest_input");
  if (j.contains("digest_edited")) r.digest_edited = require_string(j, "digest_edited");
  for (const auto& [k, v] : j.items()) {
    if (!kKnownFields.contains(k)) r.extra[k] = v;
  }
  return r;
}

Json record_to_json(const TripletRecord& r) {
  Json j;
  j["id"] = r.id;
  j["input_path"] = r.input_path.string();
  j["edited_path"] = r.edited_path.string();
  j["instruction"] = r.instruction;
  j["edit_type"] = r.edit_type;
  if (r.width) j["width"] = *r.width;
  if (r.height) j["height"] = *r.height;
  if (r.mask_path) j["mask_path"] = r.mask_path->string();
  if (!r.scores.empty()) {
    Json s = Json::object();
    for (const auto& [k, v] : r.scores) s[k] = v;
    j["scores"] = s;
  }
  if (!r.stage_verdicts.empty()) {
    Json s = Json::object();
    for (const auto& [k, v] : r.stage_verdicts) s[k] = v ? "pass" : "fail";
    j["stage_verdicts"] = s;
  }
  if (!r.digest_input.empty()) j["digest_input"] = r.digest_input;
  if (!r.digest_edited.empty()) j["digest_edited"] = r.digest_edited;
  for (const auto& [k, v] : r.extra.items()) j[k] = v;
  return j;
}

std::vector<TripletRecord> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  const auto base = path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path();
  std::vector<TripletRecord> records;
  std::set<std::string, std::less<>> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ManifestError(lineno, std::string("malformed JSON: ") + e.what());
    }
    try {
      auto r = record_from_json(j, base);
      if (!ids.insert(r.id).second) throw InvalidArgument("duplicate id \"" + r.id + "\"");
      records.push_back(std::move(r));
    } catch (const InvalidArgument& e) {
      throw ManifestError(lineno, e.what());
    }
  }
  return records;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("cannot rename onto " + path.string() + ": " + ec.message());
  }
}

void write_manifest(const std::filesystem::path& path, const std::vector<TripletRecord>& records) {
  std::ostringstream os;
  for (const auto& r : records) os << record_to_json(r).dump() << '\n';
  write_file_atomic(path, os.str());
}

}  // namespace uhredit::pipeline

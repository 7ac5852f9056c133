// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "uhredit/error.hpp"

namespace uhredit::pipeline {

/// The thirteen editing categories plus "unknown".
inline constexpr std::array<std::string_view, 14> kEditTypes{
    "camera_movement",  "object_movement",  "action_change", "object_addition", "object_deletion",
    "object_replacement", "background_change", "color_change", "text_change",   "tone_transform",
    "style_change",     "attribute_change", "personalization", "unknown"};

bool is_edit_type(std::string_view s);

struct TripletRecord {
  std::string id;
  std::filesystem::path input_path;
  std::filesystem::path edited_path;
  std::string instruction;
  std::string edit_type = "unknown";
  std::optional<int> width;
  std::optional<int> height;
  std::optional<std::filesystem::path> mask_path;
  std::map<std::string, double> scores;
  std::map<std::string, bool> stage_verdicts;  // true = passed
  std::string digest_input;
  std::string digest_edited;
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();  // unknown fields, round-tripped

  bool operator==(const TripletRecord&) const = default;
};

class ManifestError : public Error {
 public:
  ManifestError(std::size_t line, const std::string& what)
      : Error("manifest line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Parses one JSON object. Relative paths resolve against `base_dir`.
TripletRecord record_from_json(const nlohmann::ordered_json& j, const std::filesystem::path& base_dir);
nlohmann::ordered_json record_to_json(const TripletRecord& r);

/// JSON Lines, one record per nonblank line; ids must be unique.
std::vector<TripletRecord> load_manifest(const std::filesystem::path& path);

/// Writes through a temporary file in the same directory, then renames.
void write_manifest(const std::filesystem::path& path, const std::vector<TripletRecord>& records);

/// Atomic text write shared by manifest and report output.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace uhredit::pipeline

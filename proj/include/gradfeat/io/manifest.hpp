#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gradfeat/core/error.hpp"
#include "gradfeat/io/file_util.hpp"

namespace gradfeat {

struct ManifestRecord {
  std::string image_path;
  std::string role;  // "train" | "test"
  std::optional<std::string> distortion_kind;
  std::optional<int> distortion_level;
  std::optional<std::string> reference_path;
  std::optional<double> subjective_score;
  std::optional<double> subjective_std;

  bool is_iqa() const {
    return reference_path.has_value() || subjective_score.has_value();
  }
};

struct DatasetManifest {
  std::string base_dir;  // directory of the manifest file; paths resolve here
  std::vector<ManifestRecord> records;

  std::string resolve(const std::string& rel) const {
    return (std::filesystem::path(base_dir) / rel).string();
  }

  std::vector<ManifestRecord> with_role(const std::string& role) const {
    std::vector<ManifestRecord> out;
    for (const ManifestRecord& r : records) {
      if (r.role == role) out.push_back(r);
    }
    return out;
  }
};

// Parses and validates in one pass; every violation across all records is
// reported in a single error rather than failing on the first.
inline DatasetManifest load_manifest(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("manifest: ") + e.what());
  }

  DatasetManifest manifest;
  manifest.base_dir = std::filesystem::path(path).parent_path().string();
  if (manifest.base_dir.empty()) manifest.base_dir = ".";

  std::vector<std::string> violations;
  if (!doc.is_object() || !doc.contains("records") ||
      !doc["records"].is_array()) {
    throw ManifestError("manifest: top level must be {\"records\": [...]}");
  }

  std::size_t index = 0;
  for (const auto& rec : doc["records"]) {
    const std::string where = "record " + std::to_string(index);
    ManifestRecord r;
    if (!rec.is_object()) {
      violations.push_back(where + ": not an object");
      ++index;
      continue;
    }
    if (rec.contains("image_path") && rec["image_path"].is_string()) {
      r.image_path = rec["image_path"].get<std::string>();
    } else {
      violations.push_back(where + ": missing image_path");
    }
    if (rec.contains("role") && rec["role"].is_string()) {
      r.role = rec["role"].get<std::string>();
      if (r.role != "train" && r.role != "test") {
        violations.push_back(where + ": role must be train or test, got '" +
                             r.role + "'");
      }
    } else {
      violations.push_back(where + ": missing role");
    }
    if (rec.contains("distortion_kind")) {
      r.distortion_kind = rec["distortion_kind"].get<std::string>();
    }
    if (rec.contains("distortion_level")) {
      r.distortion_level = rec["distortion_level"].get<int>();
      if (*r.distortion_level < 0 || *r.distortion_level > 5) {
        violations.push_back(where + ": distortion_level out of 0..5");
      }
    }
    if (rec.contains("reference_path")) {
      r.reference_path = rec["reference_path"].get<std::string>();
    }
    if (rec.contains("subjective_score")) {
      r.subjective_score = rec["subjective_score"].get<double>();
    }
    if (rec.contains("subjective_std")) {
      r.subjective_std = rec["subjective_std"].get<double>();
    }
    if (r.is_iqa() &&
        !(r.reference_path.has_value() && r.subjective_score.has_value())) {
      violations.push_back(
          where + ": quality records need both reference_path and "
                  "subjective_score");
    }
    if (!r.image_path.empty() &&
        !std::filesystem::exists(manifest.resolve(r.image_path))) {
      violations.push_back(where + ": missing file " + r.image_path);
    }
    if (r.reference_path.has_value() &&
        !std::filesystem::exists(manifest.resolve(*r.reference_path))) {
      violations.push_back(where + ": missing file " + *r.reference_path);
    }
    manifest.records.push_back(std::move(r));
    ++index;
  }

  if (!violations.empty()) {
    std::string msg = "manifest " + path + " has " +
                      std::to_string(violations.size()) + " violation(s):";
    for (const std::string& v : violations) msg += "\n  " + v;
    throw ManifestError(msg);
  }
  return manifest;
}

}  // namespace gradfeat

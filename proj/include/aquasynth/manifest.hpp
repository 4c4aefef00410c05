#pragma once

// manifest.json: {"schema_version": 1, "normalize_export": ..., "records": [...]}.
// Keys are written in a fixed order and doubles in shortest round-trip form,
// so equal record lists always serialize to identical bytes.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "errors.hpp"
#include "record.hpp"

namespace aquasynth {

inline constexpr int kManifestSchemaVersion = 1;

inline nlohmann::ordered_json record_to_json(const SynthesisRecord& r) {
  nlohmann::ordered_json j;
  j["source_id"] = r.source_id;
  j["image_index"] = r.image_index;
  j["water_type"] = std::string(to_string(r.water_type));
  j["split"] = std::string(to_string(r.split));
  j["D"] = r.surface_depth;
  j["B_g"] = r.green_ambient;
  j["ambient"] = {{"r", r.ambient.r}, {"g", r.ambient.g}, {"b", r.ambient.b}};
  j["clamped"] = r.ambient.clamped;
  j["depth_range"] = {r.depth_range.lo, r.depth_range.hi};
  j["seed"] = r.seed;
  j["augmentation"] = std::string(to_string(r.augmentation));
  j["target_size"] = {r.target_width, r.target_height};
  j["depth_scale"] = r.depth_scale;
  j["image"] = r.image_path;
  j["ground_truth"] = r.ground_truth_path;
  j["depth"] = r.depth_path;
  return j;
}

inline SynthesisRecord record_from_json(const nlohmann::ordered_json& j) {
  try {
    SynthesisRecord r;
    r.source_id = j.at("source_id").get<std::string>();
    r.image_index = j.at("image_index").get<std::uint64_t>();
    r.water_type = water_type_from_string(j.at("water_type").get<std::string>());
    r.split = split_from_string(j.at("split").get<std::string>());
    r.surface_depth = j.at("D").get<double>();
    r.green_ambient = j.at("B_g").get<double>();
    const auto& a = j.at("ambient");
    r.ambient = {a.at("r").get<double>(), a.at("g").get<double>(), a.at("b").get<double>(),
                 j.at("clamped").get<bool>()};
    r.depth_range = {j.at("depth_range").at(0).get<double>(),
                     j.at("depth_range").at(1).get<double>()};
    r.seed = j.at("seed").get<std::uint64_t>();
    r.augmentation = augmentation_from_string(j.at("augmentation").get<std::string>());
    r.target_width = j.at("target_size").at(0).get<std::size_t>();
    r.target_height = j.at("target_size").at(1).get<std::size_t>();
    r.depth_scale = j.at("depth_scale").get<double>();
    r.image_path = j.at("image").get<std::string>();
    r.ground_truth_path = j.at("ground_truth").get<std::string>();
    r.depth_path = j.at("depth").get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedFile(std::string("manifest record: ") + e.what());
  }
}

inline std::string serialize_manifest(const std::vector<SynthesisRecord>& records,
                                      ExportNormalization normalization =
                                          ExportNormalization::unit_interval) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = kManifestSchemaVersion;
  doc["normalize_export"] = std::string(to_string(normalization));
  doc["records"] = nlohmann::ordered_json::array();
  for (const auto& r : records) doc["records"].push_back(record_to_json(r));
  return doc.dump(2) + "\n";
}

inline std::vector<SynthesisRecord> parse_manifest(const std::string& text) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw MalformedFile(std::string("manifest: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("schema_version") ||
      !doc["schema_version"].is_number_integer()) {
    throw MalformedFile("manifest lacks an integer schema_version");
  }
  const auto version = doc["schema_version"].get<int>();
  if (version != kManifestSchemaVersion) {
    throw SchemaVersionMismatch("manifest version " + std::to_string(version) + ", expected " +
                                std::to_string(kManifestSchemaVersion));
  }
  if (!doc.contains("records") || !doc["records"].is_array()) {
    throw MalformedFile("manifest lacks a records array");
  }
  std::vector<SynthesisRecord> records;
  records.reserve(doc["records"].size());
  for (const auto& j : doc["records"]) records.push_back(record_from_json(j));
  return records;
}

inline void write_manifest(const std::vector<SynthesisRecord>& records,
                           const std::filesystem::path& path,
                           ExportNormalization normalization = ExportNormalization::unit_interval) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write manifest " + path.string());
  out << serialize_manifest(records, normalization);
  if (!out) throw IoError("short write on " + path.string());
}

inline std::vector<SynthesisRecord> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_manifest(text);
}

}  // namespace aquasynth

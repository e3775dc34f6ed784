#include "con360/manifest_io.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>
#include <sstream>

#include "con360/io.hpp"

namespace con360::io {
namespace {

using nlohmann::json;
using dataset::ClipRecord;
using dataset::Manifest;
using dataset::SegmentRecord;

const json& require(const json& obj, const char* field, const char* where) {
  if (!obj.is_object() || !obj.contains(field)) {
    raise(ErrorKind::kSchema, std::string(where) + " is missing required field '" + field + "'");
  }
  return obj.at(field);
}

template <typename T>
T require_as(const json& obj, const char* field, const char* where) {
  const json& v = require(obj, field, where);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    raise(ErrorKind::kSchema, std::string(where) + " field '" + field + "' has the wrong type");
  }
}

json clip_to_json(const ClipRecord& c) {
  return {{"clip_id", c.clip_id},       {"duration", c.duration},
          {"width", c.width},           {"height", c.height},
          {"audio_rate", c.audio_rate}, {"source_uri", c.source_uri}};
}

ClipRecord clip_from_json(const json& j) {
  ClipRecord c;
  c.clip_id = require_as<std::string>(j, "clip_id", "clip");
  c.duration = require_as<double>(j, "duration", "clip");
  c.width = require_as<std::size_t>(j, "width", "clip");
  c.height = require_as<std::size_t>(j, "height", "clip");
  c.audio_rate = require_as<double>(j, "audio_rate", "clip");
  c.source_uri = require_as<std::string>(j, "source_uri", "clip");
  return c;
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    raise(ErrorKind::kParse, "malformed JSON at " +
                                 describe_offset(text, e.byte > 0 ? e.byte - 1 : 0) + ": " +
                                 e.what());
  }
}

std::string read_text(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

}  // namespace

std::string describe_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < offset; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

std::string manifest_to_json(const Manifest& m) {
  json j;
  j["schema_version"] = m.schema_version;
  j["clips"] = json::array();
  for (const auto& c : m.clips) j["clips"].push_back(clip_to_json(c));
  j["segments"] = json::array();
  for (const auto& s : m.segments) {
    j["segments"].push_back({{"clip_id", s.clip_id},
                             {"segment_index", s.segment_index},
                             {"start", s.start},
                             {"end", s.end},
                             {"split", dataset::split_name(s.split)}});
  }
  j["seed"] = m.seed ? json(*m.seed) : json(nullptr);
  j["train_fraction"] = m.train_fraction ? json(*m.train_fraction) : json(nullptr);
  j["created_at"] = m.created_at;
  j["warnings"] = m.warnings;
  return j.dump(2) + "\n";
}

Manifest manifest_from_json(const std::string& text) {
  const json j = parse_json(text);
  if (!j.is_object()) raise(ErrorKind::kSchema, "manifest must be a JSON object");
  const int version = require_as<int>(j, "schema_version", "manifest");
  if (version != dataset::kManifestSchemaVersion) {
    raise(ErrorKind::kSchema, "unsupported manifest schema_version " + std::to_string(version) +
                                  " (expected " +
                                  std::to_string(dataset::kManifestSchemaVersion) + ")");
  }
  Manifest m;
  m.schema_version = version;
  for (const auto& c : require(j, "clips", "manifest")) m.clips.push_back(clip_from_json(c));
  for (const auto& s : require(j, "segments", "manifest")) {
    SegmentRecord r;
    r.clip_id = require_as<std::string>(s, "clip_id", "segment");
    r.segment_index = require_as<std::size_t>(s, "segment_index", "segment");
    r.start = require_as<double>(s, "start", "segment");
    r.end = require_as<double>(s, "end", "segment");
    r.split = dataset::split_from_name(require_as<std::string>(s, "split", "segment"));
    m.segments.push_back(r);
  }
  const json& seed = require(j, "seed", "manifest");
  if (!seed.is_null()) m.seed = require_as<std::uint64_t>(j, "seed", "manifest");
  if (j.contains("train_fraction") && !j.at("train_fraction").is_null()) {
    m.train_fraction = require_as<double>(j, "train_fraction", "manifest");
  }
  m.created_at = require_as<std::string>(j, "created_at", "manifest");
  if (j.contains("warnings")) m.warnings = require_as<std::vector<std::string>>(j, "warnings", "manifest");
  return m;
}

void write_manifest(const Manifest& m, const std::filesystem::path& path) {
  write_text_atomic(path, manifest_to_json(m));
}

Manifest read_manifest(const std::filesystem::path& path) {
  return manifest_from_json(read_text(path));
}

std::vector<ClipRecord> read_clip_list(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  std::vector<ClipRecord> clips;
  if (path.extension() == ".csv") {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      if (line_no == 1) {
        if (line != "clip_id,duration,width,height,audio_rate,source_uri") {
          raise(ErrorKind::kSchema,
                "clip CSV header must be clip_id,duration,width,height,audio_rate,source_uri");
        }
        continue;
      }
      std::vector<std::string> cells;
      std::stringstream row(line);
      std::string cell;
      while (std::getline(row, cell, ',')) cells.push_back(cell);
      if (cells.size() == 5 && line.back() == ',') cells.emplace_back();
      if (cells.size() != 6) {
        raise(ErrorKind::kSchema, "clip CSV line " + std::to_string(line_no) + " needs 6 fields");
      }
      try {
        clips.push_back({cells[0], std::stod(cells[1]), std::stoul(cells[2]), std::stoul(cells[3]),
                         std::stod(cells[4]), cells[5]});
      } catch (const std::exception&) {
        raise(ErrorKind::kSchema, "clip CSV line " + std::to_string(line_no) + " has a bad number");
      }
    }
    return clips;
  }
  const json j = parse_json(text);
  const json& list = j.is_array() ? j : require(j, "clips", "clip list");
  if (!list.is_array()) raise(ErrorKind::kSchema, "clip list 'clips' must be an array");
  for (const auto& c : list) clips.push_back(clip_from_json(c));
  return clips;
}

}  // namespace con360::io

#pragma once

#include <filesystem>
#include <string>

#include "con360/dataset.hpp"

namespace con360::io {

// Canonical JSON: sorted keys, two-space indent, UTF-8, trailing newline.
std::string manifest_to_json(const dataset::Manifest& m);

// Throws kSchema naming the missing field or unknown schema_version, kParse
// for malformed JSON.
dataset::Manifest manifest_from_json(const std::string& text);

void write_manifest(const dataset::Manifest& m, const std::filesystem::path& path);
dataset::Manifest read_manifest(const std::filesystem::path& path);

// Clip lists: JSON ({"clips": [...]} or a bare array) or CSV with header
// clip_id,duration,width,height,audio_rate,source_uri.
std::vector<dataset::ClipRecord> read_clip_list(const std::filesystem::path& path);

// Translates a byte offset into "line L, column C" (1-based).
std::string describe_offset(const std::string& text, std::size_t offset);

}  // namespace con360::io

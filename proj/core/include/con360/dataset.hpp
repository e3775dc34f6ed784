#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "con360/geometry.hpp"
#include "con360/tensor.hpp"

// Dataset preparation: clip segmentation, clip-level train/val split, aspect
// standardization, target-format validation and caption task exchange.
namespace con360::dataset {

struct ClipRecord {
  std::string clip_id;
  double duration = 0.0;  // seconds
  std::size_t width = 0;
  std::size_t height = 0;
  double audio_rate = 0.0;  // Hz
  std::string source_uri;

  bool operator==(const ClipRecord&) const = default;
};

enum class Split { kUnassigned, kTrain, kVal };

std::string_view split_name(Split s);
Split split_from_name(std::string_view name);

struct SegmentRecord {
  std::string clip_id;
  std::size_t segment_index = 0;
  double start = 0.0;
  double end = 0.0;
  Split split = Split::kUnassigned;

  bool operator==(const SegmentRecord&) const = default;
};

inline constexpr int kManifestSchemaVersion = 1;
inline constexpr const char* kDefaultCreatedAt = "1970-01-01T00:00:00Z";

struct Manifest {
  int schema_version = kManifestSchemaVersion;
  std::vector<ClipRecord> clips;
  std::vector<SegmentRecord> segments;
  std::optional<std::uint64_t> seed;
  std::optional<double> train_fraction;
  std::string created_at = kDefaultCreatedAt;
  std::vector<std::string> warnings;

  bool operator==(const Manifest&) const = default;
};

struct Interval {
  double start = 0.0;
  double end = 0.0;
  bool operator==(const Interval&) const = default;
};

inline constexpr double kSegmentSeconds = 4.0;
inline constexpr double kSegmentOverlapSeconds = 1.0;
inline constexpr double kTrainFraction = 0.85;

// Starts at k * (seg_len - overlap) while start + seg_len <= duration.
// A clip shorter than seg_len yields no segments. Throws kParameter unless
// seg_len > overlap >= 0.
std::vector<Interval> segment_clip(double duration, double seg_len = kSegmentSeconds,
                                   double overlap = kSegmentOverlapSeconds);

// Centers of the clip's segments, the default caption timestamps.
std::vector<double> segment_midpoints(double duration, double seg_len = kSegmentSeconds,
                                      double overlap = kSegmentOverlapSeconds);

// Clips sorted by id, segments generated (split unassigned), one warning per
// clip too short to segment. Throws kInvalidData on duplicate ids or
// non-positive durations.
Manifest segment_manifest(std::vector<ClipRecord> clips, double seg_len = kSegmentSeconds,
                          double overlap = kSegmentOverlapSeconds);

// Shuffle key for a clip: first 8 bytes of SHA-256("<seed>:<clip_id>").
std::uint64_t split_key(std::uint64_t seed, const std::string& clip_id);

// Orders segmented clips by split_key and sends the first
// round_half_away(train_frac * N) to train; every segment inherits its clip's
// split. Output depends only on the clip set and seed, never on input order.
// Throws kParameter unless 0 < train_frac < 1, kInvalidData when no clip has
// a segment.
Manifest split_manifest(Manifest manifest, double train_frac, std::uint64_t seed);

// Bilinear horizontal stretch of an (H, W) or (C, H, W) image to (H, 2H).
// Throws kShape for empty images.
TensorF standardize_aspect(const TensorF& image);

struct SegmentMedia {
  std::string clip_id;
  std::size_t segment_index = 0;
  std::size_t video_frames = 0;
  double fps = 0.0;
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t audio_channels = 0;
  double audio_rate = 0.0;
  double audio_duration = 0.0;
};

struct TargetFormat {
  std::size_t video_frames = 32;
  double fps = 8.0;
  std::size_t width = 256;
  std::size_t height = 256;
  std::size_t audio_channels = 1;
  double audio_rate = 16000.0;
  double audio_duration = 4.0;
};

struct ValidationFlag {
  std::string clip_id;
  std::size_t segment_index = 0;
  std::string flag;  // frame_count, fps, resolution, channels, sample_rate, audio_duration
  std::string expected;
  std::string actual;
};

std::vector<ValidationFlag> validate_targets(const std::vector<SegmentMedia>& media,
                                             const TargetFormat& target = {});

struct CaptionTask {
  std::string clip_id;
  double timestamp = 0.0;
  geometry::CubeFace face = geometry::CubeFace::kFront;
  std::string image;  // relative to the export root
};

struct CaptionExport {
  std::vector<CaptionTask> tasks;
  std::vector<std::string> warnings;
};

// Face image path for a task, relative to the export root.
std::string caption_face_path(const std::string& clip_id, double timestamp,
                              geometry::CubeFace face);

// Renders the six cube faces of the frame nearest each timestamp
// (round(timestamp * fps)) into <out_root>/faces/*.npy and writes
// <out_root>/tasks.json. Timestamps without a frame are skipped with a warning.
CaptionExport export_caption_tasks(const std::string& clip_id, const TensorF& frames, double fps,
                                   const std::vector<double>& timestamps, std::size_t face_size,
                                   const std::filesystem::path& out_root);

std::string caption_tasks_to_json(const std::vector<CaptionTask>& tasks);

struct CaptionRecord {
  std::string clip_id;
  std::map<std::pair<geometry::CubeFace, double>, std::string> face_captions;
  std::optional<std::string> aggregated_caption;
};

struct CaptionIngest {
  std::vector<CaptionRecord> records;  // sorted by clip_id
  std::vector<std::string> warnings;
};

// Parses {"results": [{clip_id, timestamp, face, caption}], "aggregated":
// [{clip_id, caption}]}. Missing faces are fine; duplicate (face, timestamp)
// keys keep the last caption and add a warning. Throws kParse with line and
// column for malformed JSON, kSchema for missing fields or unknown faces.
CaptionIngest ingest_captions(const std::string& json_text);

std::string caption_records_to_json(const std::vector<CaptionRecord>& records);

}  // namespace con360::dataset

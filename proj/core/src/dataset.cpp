#include "con360/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <set>
#include <tuple>

#include "con360/io.hpp"
#include "con360/manifest_io.hpp"

namespace con360::dataset {
namespace {

using nlohmann::json;

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

std::string_view split_name(Split s) {
  switch (s) {
    case Split::kUnassigned: return "unassigned";
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
  }
  return "unassigned";
}

Split split_from_name(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "unassigned") return Split::kUnassigned;
  raise(ErrorKind::kSchema, "unknown split '" + std::string(name) + "'");
}

std::vector<Interval> segment_clip(double duration, double seg_len, double overlap) {
  if (!(seg_len > 0.0) || !(overlap >= 0.0) || !(overlap < seg_len)) {
    raise(ErrorKind::kParameter, "segment length must exceed overlap, overlap must be >= 0");
  }
  const double step = seg_len - overlap;
  std::vector<Interval> out;
  for (std::size_t k = 0;; ++k) {
    const double start = static_cast<double>(k) * step;
    if (start + seg_len > duration + 1e-9) break;
    out.push_back({start, start + seg_len});
  }
  return out;
}

std::vector<double> segment_midpoints(double duration, double seg_len, double overlap) {
  std::vector<double> mids;
  for (const auto& s : segment_clip(duration, seg_len, overlap)) {
    mids.push_back((s.start + s.end) / 2.0);
  }
  return mids;
}

Manifest segment_manifest(std::vector<ClipRecord> clips, double seg_len, double overlap) {
  std::ranges::sort(clips, {}, &ClipRecord::clip_id);
  for (std::size_t i = 0; i < clips.size(); ++i) {
    if (clips[i].clip_id.empty()) raise(ErrorKind::kInvalidData, "clip with an empty clip_id");
    if (i > 0 && clips[i].clip_id == clips[i - 1].clip_id) {
      raise(ErrorKind::kInvalidData, "duplicate clip_id '" + clips[i].clip_id + "'");
    }
    if (!(clips[i].duration > 0.0)) {
      raise(ErrorKind::kInvalidData, "clip '" + clips[i].clip_id + "' has non-positive duration");
    }
  }
  Manifest m;
  for (const auto& clip : clips) {
    const auto intervals = segment_clip(clip.duration, seg_len, overlap);
    if (intervals.empty()) {
      m.warnings.push_back("clip '" + clip.clip_id + "' is shorter than " +
                           format_number(seg_len) + " s; no segments");
    }
    for (std::size_t k = 0; k < intervals.size(); ++k) {
      m.segments.push_back({clip.clip_id, k, intervals[k].start, intervals[k].end, Split::kUnassigned});
    }
  }
  m.clips = std::move(clips);
  return m;
}

std::uint64_t split_key(std::uint64_t seed, const std::string& clip_id) {
  const std::string material = std::to_string(seed) + ":" + clip_id;
  const std::string hex = io::sha256_hex(
      std::span(reinterpret_cast<const std::uint8_t*>(material.data()), material.size()));
  return std::stoull(hex.substr(0, 16), nullptr, 16);
}

Manifest split_manifest(Manifest manifest, double train_frac, std::uint64_t seed) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) {
    raise(ErrorKind::kParameter, "train fraction must lie in (0, 1)");
  }
  if (manifest.segments.empty()) {
    std::vector<std::string> warnings = std::move(manifest.warnings);
    manifest = segment_manifest(std::move(manifest.clips));
    if (manifest.warnings.empty()) manifest.warnings = std::move(warnings);
  }
  std::ranges::sort(manifest.clips, {}, &ClipRecord::clip_id);

  std::set<std::string> segmented;
  for (const auto& s : manifest.segments) segmented.insert(s.clip_id);
  if (segmented.empty()) raise(ErrorKind::kInvalidData, "no clip has a segment to split");

  std::vector<std::pair<std::uint64_t, std::string>> order;
  for (const auto& id : segmented) order.emplace_back(split_key(seed, id), id);
  std::ranges::sort(order);
  const auto n_train = static_cast<std::size_t>(
      std::round(train_frac * static_cast<double>(order.size())));
  std::set<std::string> train;
  for (std::size_t i = 0; i < n_train; ++i) train.insert(order[i].second);

  for (auto& s : manifest.segments) {
    s.split = train.contains(s.clip_id) ? Split::kTrain : Split::kVal;
  }
  std::ranges::sort(manifest.segments, [](const SegmentRecord& a, const SegmentRecord& b) {
    return std::tie(a.clip_id, a.segment_index) < std::tie(b.clip_id, b.segment_index);
  });
  manifest.seed = seed;
  manifest.train_fraction = train_frac;
  return manifest;
}

TensorF standardize_aspect(const TensorF& image) {
  std::size_t channels = 1, h = 0, w = 0;
  if (image.rank() == 2) {
    h = image.dim(0);
    w = image.dim(1);
  } else if (image.rank() == 3) {
    channels = image.dim(0);
    h = image.dim(1);
    w = image.dim(2);
  } else {
    raise(ErrorKind::kShape, "image must be (H, W) or (C, H, W)");
  }
  if (h == 0 || w == 0 || channels == 0) raise(ErrorKind::kShape, "image has a zero dimension");
  const std::size_t out_w = 2 * h;
  if (out_w == w) return image;
  Shape shape = image.rank() == 2 ? Shape{h, out_w} : Shape{channels, h, out_w};
  TensorF out(shape);
  const double ratio = static_cast<double>(w) / static_cast<double>(out_w);
  for (std::size_t x = 0; x < out_w; ++x) {
    const double src = std::clamp((static_cast<double>(x) + 0.5) * ratio - 0.5, 0.0,
                                  static_cast<double>(w - 1));
    const auto x0 = static_cast<std::size_t>(std::floor(src));
    const std::size_t x1 = std::min(x0 + 1, w - 1);
    const double t = src - static_cast<double>(x0);
    for (std::size_t c = 0; c < channels; ++c) {
      for (std::size_t y = 0; y < h; ++y) {
        const double a = image[(c * h + y) * w + x0];
        const double b = image[(c * h + y) * w + x1];
        out[(c * h + y) * out_w + x] = static_cast<float>(a + t * (b - a));
      }
    }
  }
  return out;
}

std::vector<ValidationFlag> validate_targets(const std::vector<SegmentMedia>& media,
                                             const TargetFormat& target) {
  std::vector<ValidationFlag> flags;
  auto differs = [](double a, double b) { return std::abs(a - b) > 1e-6; };
  for (const auto& m : media) {
    auto flag = [&](std::string name, std::string expected, std::string actual) {
      flags.push_back({m.clip_id, m.segment_index, std::move(name), std::move(expected),
                       std::move(actual)});
    };
    if (m.video_frames != target.video_frames) {
      flag("frame_count", std::to_string(target.video_frames), std::to_string(m.video_frames));
    }
    if (differs(m.fps, target.fps)) flag("fps", format_number(target.fps), format_number(m.fps));
    if (m.width != target.width || m.height != target.height) {
      flag("resolution", std::to_string(target.width) + "x" + std::to_string(target.height),
           std::to_string(m.width) + "x" + std::to_string(m.height));
    }
    if (m.audio_channels != target.audio_channels) {
      flag("channels", std::to_string(target.audio_channels), std::to_string(m.audio_channels));
    }
    if (differs(m.audio_rate, target.audio_rate)) {
      flag("sample_rate", format_number(target.audio_rate), format_number(m.audio_rate));
    }
    if (differs(m.audio_duration, target.audio_duration)) {
      flag("audio_duration", format_number(target.audio_duration),
           format_number(m.audio_duration));
    }
  }
  return flags;
}

std::string caption_face_path(const std::string& clip_id, double timestamp,
                              geometry::CubeFace face) {
  char ms[32];
  std::snprintf(ms, sizeof(ms), "%08lld", static_cast<long long>(std::llround(timestamp * 1000.0)));
  return "faces/" + clip_id + "_t" + ms + "_" + std::string(geometry::cube_face_name(face)) +
         ".npy";
}

CaptionExport export_caption_tasks(const std::string& clip_id, const TensorF& frames, double fps,
                                   const std::vector<double>& timestamps, std::size_t face_size,
                                   const std::filesystem::path& out_root) {
  if (frames.rank() != 3 && frames.rank() != 4) {
    raise(ErrorKind::kShape, "frames must be (T, H, W) or (T, C, H, W)");
  }
  if (!(fps > 0.0)) raise(ErrorKind::kParameter, "fps must be positive");
  CaptionExport result;
  const std::size_t count = frames.dim(0);
  Shape frame_shape(frames.shape().begin() + 1, frames.shape().end());
  for (double ts : timestamps) {
    const long long index = std::llround(ts * fps);
    if (ts < 0.0 || index < 0 || static_cast<std::size_t>(index) >= count) {
      result.warnings.push_back("clip '" + clip_id + "': no frame at t=" + format_number(ts) +
                                " s; tasks skipped");
      continue;
    }
    const auto slab = frames.slab(static_cast<std::size_t>(index));
    const TensorF frame(frame_shape, std::vector<float>(slab.begin(), slab.end()));
    const auto faces = geometry::erp_to_cubemap(frame, face_size);
    for (std::size_t k = 0; k < geometry::kCubeFaces.size(); ++k) {
      const auto face = geometry::kCubeFaces[k];
      const std::string rel = caption_face_path(clip_id, ts, face);
      io::write_npy(faces[k], out_root / rel);
      result.tasks.push_back({clip_id, ts, face, rel});
    }
  }
  io::write_text_atomic(out_root / "tasks.json", caption_tasks_to_json(result.tasks));
  return result;
}

std::string caption_tasks_to_json(const std::vector<CaptionTask>& tasks) {
  json j;
  j["tasks"] = json::array();
  for (const auto& t : tasks) {
    j["tasks"].push_back({{"clip_id", t.clip_id},
                          {"timestamp", t.timestamp},
                          {"face", geometry::cube_face_name(t.face)},
                          {"image", t.image}});
  }
  return j.dump(2) + "\n";
}

CaptionIngest ingest_captions(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    raise(ErrorKind::kParse, "malformed caption JSON at " +
                                 io::describe_offset(json_text, e.byte > 0 ? e.byte - 1 : 0) +
                                 ": " + e.what());
  }
  if (!j.is_object()) raise(ErrorKind::kSchema, "caption results must be a JSON object");
  CaptionIngest out;
  std::map<std::string, CaptionRecord> records;
  auto field = [](const json& obj, const char* name) -> const json& {
    if (!obj.is_object() || !obj.contains(name)) {
      raise(ErrorKind::kSchema, std::string("caption entry lacks field '") + name + "'");
    }
    return obj.at(name);
  };
  try {
    if (j.contains("results")) {
      for (const auto& r : j.at("results")) {
        const auto clip = field(r, "clip_id").get<std::string>();
        const auto ts = field(r, "timestamp").get<double>();
        const auto face_name = field(r, "face").get<std::string>();
        geometry::CubeFace face;
        try {
          face = geometry::cube_face_from_name(face_name);
        } catch (const Error&) {
          raise(ErrorKind::kSchema, "unknown face '" + face_name + "' for clip '" + clip + "'");
        }
        auto& rec = records[clip];
        rec.clip_id = clip;
        const auto key = std::make_pair(face, ts);
        if (rec.face_captions.contains(key)) {
          out.warnings.push_back("duplicate caption for clip '" + clip + "' face " + face_name +
                                 " t=" + format_number(ts) + "; keeping the last");
        }
        rec.face_captions[key] = field(r, "caption").get<std::string>();
      }
    }
    if (j.contains("aggregated")) {
      for (const auto& a : j.at("aggregated")) {
        const auto clip = field(a, "clip_id").get<std::string>();
        auto& rec = records[clip];
        rec.clip_id = clip;
        if (rec.aggregated_caption) {
          out.warnings.push_back("duplicate aggregated caption for clip '" + clip +
                                 "'; keeping the last");
        }
        rec.aggregated_caption = field(a, "caption").get<std::string>();
      }
    }
  } catch (const json::exception& e) {
    raise(ErrorKind::kSchema, std::string("caption JSON has the wrong structure: ") + e.what());
  }
  for (auto& [id, rec] : records) out.records.push_back(std::move(rec));
  return out;
}

std::string caption_records_to_json(const std::vector<CaptionRecord>& records) {
  json j;
  j["records"] = json::array();
  for (const auto& r : records) {
    json faces = json::array();
    for (const auto& [key, text] : r.face_captions) {
      faces.push_back({{"face", geometry::cube_face_name(key.first)},
                       {"timestamp", key.second},
                       {"caption", text}});
    }
    json rec = {{"clip_id", r.clip_id}, {"face_captions", faces}};
    rec["aggregated_caption"] = r.aggregated_caption ? json(*r.aggregated_caption) : json(nullptr);
    j["records"].push_back(rec);
  }
  return j.dump(2) + "\n";
}

}  // namespace con360::dataset

#include <string>

#include "con360/dataset.hpp"
#include "con360/io.hpp"
#include "con360/manifest_io.hpp"
#include "context.hpp"

namespace con360::cli {
namespace {

struct SegmentOptions {
  std::string clips;
  double seg_len = dataset::kSegmentSeconds;
  double overlap = dataset::kSegmentOverlapSeconds;
  std::string created_at = dataset::kDefaultCreatedAt;
  std::string out;
};

struct SplitOptions {
  std::string manifest;
  std::string clips;
  double frac = dataset::kTrainFraction;
  std::string created_at = dataset::kDefaultCreatedAt;
  std::string out;
};

struct ExportOptions {
  std::string frames;
  std::string clip_id;
  double fps = 8.0;
  std::string timestamps;
  std::size_t face_size = 256;
  std::string out;
};

struct IngestOptions {
  std::string in;
  std::string out;
};

struct ValidateOptions {
  std::string media;
  bool strict = false;
  std::string out;
};

void finish_manifest(const dataset::Manifest& m, const std::string& out_arg, Sidecar& sidecar,
                     const RunContext& ctx) {
  const fs::path out = ctx.output(out_arg);
  io::write_manifest(m, out);
  sidecar.add_output(out);
  sidecar.write(sidecar_path_for_file(out));
  if (ctx.out) {
    for (const auto& w : m.warnings) *ctx.out << "warning: " << w << '\n';
  }
  ctx.report(out);
}

void run_segment(const SegmentOptions& o, const RunContext& ctx) {
  const fs::path clips = ctx.input(o.clips);
  auto m = dataset::segment_manifest(io::read_clip_list(clips), o.seg_len, o.overlap);
  m.created_at = o.created_at;
  Sidecar sidecar("dataset segment");
  sidecar.params = {{"seg_len", o.seg_len}, {"overlap", o.overlap}};
  sidecar.add_input("clips", o.clips, clips);
  finish_manifest(m, o.out, sidecar, ctx);
}

void run_split(const SplitOptions& o, const RunContext& ctx) {
  if (o.manifest.empty() == o.clips.empty()) {
    throw UsageError("dataset split needs exactly one of --manifest or --clips");
  }
  Sidecar sidecar("dataset split");
  dataset::Manifest m;
  if (!o.manifest.empty()) {
    const fs::path p = ctx.input(o.manifest);
    m = io::read_manifest(p);
    sidecar.add_input("manifest", o.manifest, p);
  } else {
    const fs::path p = ctx.input(o.clips);
    m.clips = io::read_clip_list(p);
    sidecar.add_input("clips", o.clips, p);
  }
  m = dataset::split_manifest(std::move(m), o.frac, ctx.seed);
  m.created_at = o.created_at;
  std::size_t train = 0, val = 0;
  for (const auto& s : m.segments) {
    train += s.split == dataset::Split::kTrain;
    val += s.split == dataset::Split::kVal;
  }
  sidecar.params = {{"frac", o.frac},
                    {"seed", ctx.seed},
                    {"train_segments", train},
                    {"val_segments", val}};
  finish_manifest(m, o.out, sidecar, ctx);
}

void run_export(const ExportOptions& o, const RunContext& ctx) {
  if (o.clip_id.empty()) throw UsageError("--clip-id must not be empty");
  if (!(o.fps > 0.0)) throw UsageError("--fps must be positive");
  const fs::path in = ctx.input(o.frames);
  const TensorF frames = io::read_npy_float(in);
  if (frames.rank() < 3) {
    raise(ErrorKind::kShape, "caption export needs (T,H,W) or (T,C,H,W) frames");
  }
  std::vector<double> stamps;
  std::string stamp_source = "segment_midpoints";
  if (!o.timestamps.empty()) {
    stamps = parse_list(o.timestamps, "--timestamps");
    stamp_source = "explicit";
  } else {
    stamps = dataset::segment_midpoints(static_cast<double>(frames.dim(0)) / o.fps);
  }
  const fs::path dir = ctx.output_dir(o.out);
  const auto result =
      dataset::export_caption_tasks(o.clip_id, frames, o.fps, stamps, o.face_size, dir);

  Sidecar sidecar("dataset captions export");
  sidecar.params = {{"clip_id", o.clip_id},
                    {"fps", o.fps},
                    {"face_size", o.face_size},
                    {"timestamps", stamps},
                    {"timestamp_source", stamp_source},
                    {"warnings", result.warnings}};
  sidecar.add_input("frames", o.frames, in);
  for (const auto& t : result.tasks) sidecar.add_output(dir / t.image);
  sidecar.add_output(dir / "tasks.json");
  sidecar.write(sidecar_path_for_dir(dir));
  if (ctx.out) {
    for (const auto& w : result.warnings) *ctx.out << "warning: " << w << '\n';
  }
  ctx.report(dir);
}

void run_ingest(const IngestOptions& o, const RunContext& ctx) {
  const fs::path in = ctx.input(o.in);
  const auto bytes = io::read_file(in);
  const auto ingest = dataset::ingest_captions(std::string(bytes.begin(), bytes.end()));
  const fs::path out = ctx.output(o.out);
  io::write_text_atomic(out, dataset::caption_records_to_json(ingest.records));
  Sidecar sidecar("dataset captions ingest");
  sidecar.params = {{"records", ingest.records.size()}, {"warnings", ingest.warnings}};
  sidecar.add_input("results", o.in, in);
  sidecar.add_output(out);
  sidecar.write(sidecar_path_for_file(out));
  if (ctx.out) {
    for (const auto& w : ingest.warnings) *ctx.out << "warning: " << w << '\n';
  }
  ctx.report(out);
}

dataset::SegmentMedia media_from_json(const json& j) {
  dataset::SegmentMedia m;
  m.clip_id = j.at("clip_id").get<std::string>();
  m.segment_index = j.value("segment_index", std::size_t{0});
  m.video_frames = j.at("video_frames").get<std::size_t>();
  m.fps = j.at("fps").get<double>();
  m.width = j.at("width").get<std::size_t>();
  m.height = j.at("height").get<std::size_t>();
  m.audio_channels = j.at("audio_channels").get<std::size_t>();
  m.audio_rate = j.at("audio_rate").get<double>();
  m.audio_duration = j.at("audio_duration").get<double>();
  return m;
}

void run_validate(const ValidateOptions& o, const RunContext& ctx) {
  const fs::path in = ctx.input(o.media);
  const auto bytes = io::read_file(in);
  const json doc = json::parse(bytes.begin(), bytes.end());
  const json& list = doc.is_array() ? doc : doc.at("segments");
  std::vector<dataset::SegmentMedia> media;
  for (const auto& j : list) media.push_back(media_from_json(j));

  const auto flags = dataset::validate_targets(media);
  json report = {{"checked", media.size()}, {"flags", json::array()}};
  for (const auto& f : flags) {
    report["flags"].push_back({{"clip_id", f.clip_id},
                               {"segment_index", f.segment_index},
                               {"flag", f.flag},
                               {"expected", f.expected},
                               {"actual", f.actual}});
    if (ctx.out) {
      *ctx.out << "flag: " << f.clip_id << '#' << f.segment_index << ' ' << f.flag
               << " expected " << f.expected << " got " << f.actual << '\n';
    }
  }
  const fs::path out = ctx.output(o.out);
  io::write_text_atomic(out, report.dump(2) + "\n");
  Sidecar sidecar("dataset validate");
  sidecar.params = {{"strict", o.strict}, {"flag_count", flags.size()}};
  sidecar.add_input("media", o.media, in);
  sidecar.add_output(out);
  sidecar.write(sidecar_path_for_file(out));
  ctx.report(out);
  if (o.strict && !flags.empty()) {
    raise(ErrorKind::kInvalidData,
          std::to_string(flags.size()) + " segment(s) do not match the target format");
  }
}

}  // namespace

void add_dataset_commands(CLI::App& app, Registry& reg, RunContext& ctx) {
  auto* ds = app.add_subcommand("dataset", "Dataset preparation: manifests, splits, captions");
  ds->require_subcommand(1);

  auto so = reg.make<SegmentOptions>();
  auto* seg = ds->add_subcommand("segment", "Cut clips into overlapping segments");
  seg->add_option("--clips", so->clips, "Clip list (JSON or CSV)")->required();
  seg->add_option("--seg-len", so->seg_len, "Segment length, seconds")->capture_default_str();
  seg->add_option("--overlap", so->overlap, "Overlap, seconds")->capture_default_str();
  seg->add_option("--created-at", so->created_at, "Timestamp stored in the manifest")
      ->capture_default_str();
  seg->add_option("--out", so->out, "Manifest JSON")->required();
  reg.on(seg, [so, &ctx] { run_segment(*so, ctx); });

  auto po = reg.make<SplitOptions>();
  auto* split = ds->add_subcommand("split", "Seeded clip-level train/val split");
  split->add_option("--manifest", po->manifest, "Manifest from `dataset segment`");
  split->add_option("--clips", po->clips, "Clip list; segmented with defaults");
  split->add_option("--frac", po->frac, "Train fraction")->capture_default_str();
  split->add_option("--created-at", po->created_at)->capture_default_str();
  split->add_option("--out", po->out, "Manifest JSON")->required();
  reg.on(split, [po, &ctx] { run_split(*po, ctx); });

  auto* captions = ds->add_subcommand("captions", "Caption task exchange");
  captions->require_subcommand(1);

  auto eo = reg.make<ExportOptions>();
  auto* exp = captions->add_subcommand("export", "Render cube faces for captioning");
  exp->add_option("--frames", eo->frames, "ERP frames NPY (T,H,W) or (T,C,H,W)")->required();
  exp->add_option("--clip-id", eo->clip_id)->required();
  exp->add_option("--fps", eo->fps)->capture_default_str();
  exp->add_option("--timestamps", eo->timestamps, "Comma-separated seconds; default midpoints");
  exp->add_option("--face-size", eo->face_size)->capture_default_str();
  exp->add_option("--out", eo->out, "Export directory")->required();
  reg.on(exp, [eo, &ctx] { run_export(*eo, ctx); });

  auto io_opts = reg.make<IngestOptions>();
  auto* ing = captions->add_subcommand("ingest", "Collect caption results");
  ing->add_option("--in", io_opts->in, "Caption results JSON")->required();
  ing->add_option("--out", io_opts->out, "Caption records JSON")->required();
  reg.on(ing, [io_opts, &ctx] { run_ingest(*io_opts, ctx); });

  auto vo = reg.make<ValidateOptions>();
  auto* val = ds->add_subcommand("validate", "Check segments against the target format");
  val->add_option("--media", vo->media, "Segment media JSON")->required();
  val->add_flag("--strict", vo->strict, "Exit 4 when any segment is flagged");
  val->add_option("--out", vo->out, "Report JSON")->required();
  reg.on(val, [vo, &ctx] { run_validate(*vo, ctx); });
}

}  // namespace con360::cli

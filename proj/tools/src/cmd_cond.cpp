#include <cstdio>
#include <optional>
#include <string>

#include "con360/basd.hpp"
#include "con360/conditioning.hpp"
#include "con360/io.hpp"
#include "con360/parallel.hpp"
#include "con360/saliency.hpp"
#include "context.hpp"

namespace con360::cli {
namespace {

using conditioning::MapEncoderConfig;
using conditioning::WeightStore;

struct RegionOptions {
  std::string saliency;
  double fps = 8.0;
  double tau = 0.5;
  double min_region_fraction = 1e-4;
  std::string fov = "90x90";
  std::size_t top_k = 4;
  std::string mode = "segment";
  bool uniform_centroid = false;
  std::string mask_out;
  std::string out;
};

struct BasdOptions {
  std::string saliency;
  std::string regions;
  std::string center = "auto";
  std::string fov = "90x90";
  double roll = 0.0;
  double fps = 8.0;
  double tau = 0.5;
  std::string mode = "segment";
  std::string metric = "pixels";
  bool pgm = false;
  std::string out;
};

struct StackOptions {
  std::string saliency;
  std::string basd;
  double fps = 8.0;
  std::string out;
};

struct WeightOptions {
  std::string init = "zeros";
  double scale = 0.1;
  std::string out;
};

struct EncodeOptions {
  std::string stack;
  std::string weights;
  std::string init = "zeros";
  double scale = 0.1;
  double fps = 8.0;
  bool pool = false;
  std::string out;
};

TensorF as_sequence(TensorF t) {
  if (t.rank() == 2) return TensorF({1, t.dim(0), t.dim(1)}, std::move(t.storage()));
  if (t.rank() != 3) {
    raise(ErrorKind::kShape, "saliency must be (T, H, W) or (H, W), got " +
                                 shape_to_string(t.shape()));
  }
  return t;
}

saliency::ViewpointMode parse_mode(const std::string& mode) {
  if (mode == "segment") return saliency::ViewpointMode::kSegment;
  if (mode == "per-frame") return saliency::ViewpointMode::kPerFrame;
  throw UsageError("--mode must be 'segment' or 'per-frame', got '" + mode + "'");
}

saliency::ViewpointParams viewpoint_params(const std::string& fov, const std::string& mode,
                                           double tau) {
  saliency::ViewpointParams p;
  const auto [w, h] = parse_pair(fov, 'x', "--fov");
  p.fov_w = deg_to_rad(w);
  p.fov_h = deg_to_rad(h);
  p.mode = parse_mode(mode);
  p.regions.tau = tau;
  return p;
}

json region_to_json(const saliency::SalientRegion& r) {
  return {{"label", r.label},
          {"pixel_count", r.pixel_count},
          {"mass", r.mass},
          {"centroid", {{"lat", r.centroid.lat}, {"lon", r.centroid.lon}}},
          {"erp_bbox",
           {{"u_min", r.erp_bbox.u_min},
            {"v_min", r.erp_bbox.v_min},
            {"u_max", r.erp_bbox.u_max},
            {"v_max", r.erp_bbox.v_max},
            {"wrapped", r.erp_bbox.wrapped}}}};
}

void run_regions(const RegionOptions& o, const RunContext& ctx) {
  if (o.top_k == 0) throw UsageError("--top-k must be positive");
  auto vp = viewpoint_params(o.fov, o.mode, o.tau);
  vp.regions.min_region_fraction = o.min_region_fraction;
  vp.regions.weighted_centroid = !o.uniform_centroid;

  const fs::path in = ctx.input(o.saliency);
  const auto seq = saliency::SaliencySequence::from_tensor(as_sequence(io::read_npy_float(in)), o.fps);
  const std::size_t t_count = seq.length();
  const auto& grid = seq.grid();

  std::vector<std::vector<saliency::SalientRegion>> regions(t_count);
  std::vector<saliency::BinaryMask> masks(t_count);
  parallel_for(t_count, [&](std::size_t t) {
    const auto& frame = seq.frames()[t];
    regions[t] = saliency::extract_regions(frame, vp.regions);
    masks[t] = saliency::threshold(saliency::normalize_minmax(frame), vp.regions.tau);
  });
  const auto viewpoints = saliency::select_viewpoints(seq, vp);

  json doc;
  doc["frames"] = json::array();
  for (std::size_t t = 0; t < t_count; ++t) {
    json frame = {{"frame", t}, {"regions", json::array()}, {"fovs", json::array()}};
    for (const auto& r : regions[t]) frame["regions"].push_back(region_to_json(r));
    for (const auto& f : saliency::regions_to_fovs(regions[t], vp.fov_w, vp.fov_h, o.top_k)) {
      frame["fovs"].push_back(fov_to_json(f));
    }
    doc["frames"].push_back(std::move(frame));
  }
  doc["viewpoints"] = json::array();
  if (viewpoints) {
    for (const auto& f : *viewpoints) doc["viewpoints"].push_back(fov_to_json(f));
  }
  doc["grid"] = {{"width", grid.width()}, {"height", grid.height()}};

  const fs::path out = ctx.output(o.out);
  io::write_text_atomic(out, doc.dump(2) + "\n");
  Sidecar sidecar("cond regions");
  sidecar.params = {{"fps", o.fps},   {"tau", o.tau},   {"min_region_fraction", o.min_region_fraction},
                    {"fov_deg", o.fov}, {"top_k", o.top_k}, {"mode", o.mode},
                    {"weighted_centroid", !o.uniform_centroid}};
  sidecar.add_input("saliency", o.saliency, in);
  sidecar.add_output(out);
  if (!o.mask_out.empty()) {
    Tensor<std::uint8_t> stacked({t_count, grid.height(), grid.width()});
    for (std::size_t t = 0; t < t_count; ++t) {
      std::copy(masks[t].bits.begin(), masks[t].bits.end(), stacked.slab(t).begin());
    }
    const fs::path mask_path = ctx.output(o.mask_out);
    io::write_npy(io::to_tensor_file(stacked), mask_path);
    sidecar.add_output(mask_path);
    ctx.report(mask_path);
  }
  sidecar.write(sidecar_path_for_file(out));
  ctx.report(out);
}

bool same_fov(const geometry::FovSpec& a, const geometry::FovSpec& b) {
  return a.center.lat == b.center.lat && a.center.lon == b.center.lon && a.hfov == b.hfov &&
         a.vfov == b.vfov && a.roll == b.roll;
}

void run_basd(const BasdOptions& o, const RunContext& ctx) {
  if (o.metric != "pixels" && o.metric != "angular") {
    throw UsageError("--metric must be 'pixels' or 'angular'");
  }
  const auto metric =
      o.metric == "angular" ? basd::DistanceMetric::kAngular : basd::DistanceMetric::kErpPixels;
  auto vp = viewpoint_params(o.fov, o.mode, o.tau);

  Sidecar sidecar("cond basd");
  const fs::path sal_path = ctx.input(o.saliency);
  const auto seq =
      saliency::SaliencySequence::from_tensor(as_sequence(io::read_npy_float(sal_path)), o.fps);
  sidecar.add_input("saliency", o.saliency, sal_path);
  const std::size_t t_count = seq.length();
  const auto& grid = seq.grid();

  std::vector<geometry::FovSpec> fovs;
  std::string center_source = o.center;
  if (!o.regions.empty()) {
    const fs::path reg_path = ctx.input(o.regions);
    const auto bytes = io::read_file(reg_path);
    const json doc = json::parse(bytes.begin(), bytes.end());
    for (const auto& f : doc.at("viewpoints")) fovs.push_back(fov_from_json(f));
    if (fovs.size() != t_count) {
      raise(ErrorKind::kShape, "regions file has " + std::to_string(fovs.size()) +
                                   " viewpoints for " + std::to_string(t_count) + " frames");
    }
    sidecar.add_input("regions", o.regions, reg_path);
    center_source = "regions";
  } else if (o.center == "auto") {
    auto selected = saliency::select_viewpoints(seq, vp);
    if (!selected) raise(ErrorKind::kInvalidData, "no salient region found for --center auto");
    fovs = std::move(*selected);
  } else {
    const auto [lat, lon] = parse_pair(o.center, ',', "--center");
    geometry::FovSpec fov;
    fov.center = {deg_to_rad(lat), deg_to_rad(lon)};
    fov.hfov = vp.fov_w;
    fov.vfov = vp.fov_h;
    fovs.assign(t_count, fov);
  }
  for (auto& f : fovs) f.roll = deg_to_rad(o.roll);

  // Frames that share a viewpoint share one map.
  std::vector<std::size_t> owner(t_count);
  std::vector<std::size_t> unique;
  for (std::size_t t = 0; t < t_count; ++t) {
    owner[t] = t;
    for (std::size_t u : unique) {
      if (same_fov(fovs[u], fovs[t])) {
        owner[t] = u;
        break;
      }
    }
    if (owner[t] == t) unique.push_back(t);
  }
  std::vector<basd::BasdMap> maps(t_count);
  parallel_for(unique.size(), [&](std::size_t i) {
    maps[unique[i]] = basd::basd_for_fov(fovs[unique[i]], grid, metric);
  });

  TensorF result({t_count, grid.height(), grid.width()});
  for (std::size_t t = 0; t < t_count; ++t) {
    const auto& m = maps[owner[t]];
    std::copy(m.values.begin(), m.values.end(), result.slab(t).begin());
  }
  const fs::path out = ctx.output(o.out);
  io::write_npy(result, out);
  sidecar.add_output(out);

  json fov_list = json::array();
  for (const auto& f : fovs) fov_list.push_back(fov_to_json(f));
  sidecar.params = {{"fov_deg", o.fov}, {"center", center_source}, {"roll_deg", o.roll},
                    {"fps", o.fps},     {"tau", o.tau},            {"mode", o.mode},
                    {"metric", o.metric}, {"fovs", fov_list}};
  if (o.pgm) {
    json packings = json::array();
    for (std::size_t t = 0; t < t_count; ++t) {
      basd::PgmPacking packing;
      const auto img = basd::pack_pgm16(maps[owner[t]], &packing);
      char name[64];
      std::snprintf(name, sizeof name, "_frame%05zu.pgm", t);
      const fs::path pgm = out.parent_path() / (out.stem().string() + name);
      io::write_pgm16(img, pgm);
      sidecar.add_output(pgm);
      packings.push_back({{"frame", t},
                          {"max_abs", packing.max_abs},
                          {"offset", packing.offset},
                          {"scale", packing.scale}});
    }
    sidecar.params["pgm_packing"] = packings;
  }
  sidecar.write(sidecar_path_for_file(out));
  ctx.report(out);
}

void run_stack(const StackOptions& o, const RunContext& ctx) {
  const fs::path sal = ctx.input(o.saliency);
  const fs::path bas = ctx.input(o.basd);
  const auto stack = conditioning::stack_maps(
      conditioning::normalize_frames(as_sequence(io::read_npy_float(sal))),
      conditioning::normalize_frames(as_sequence(io::read_npy_float(bas))), o.fps);
  const fs::path out = ctx.output(o.out);
  io::write_npy(stack.tensor, out);
  Sidecar sidecar("cond stack");
  sidecar.params = {
      {"fps", o.fps}, {"normalize", "minmax_per_frame"}, {"shape", stack.tensor.shape()}};
  sidecar.add_input("saliency", o.saliency, sal);
  sidecar.add_input("basd", o.basd, bas);
  sidecar.add_output(out);
  sidecar.write(sidecar_path_for_file(out));
  ctx.report(out);
}

WeightStore init_weights(const std::string& init, const MapEncoderConfig& cfg, std::uint64_t seed,
                         double scale) {
  if (init == "zeros") return WeightStore::zeros(cfg);
  if (init == "random") return WeightStore::random(cfg, seed, scale);
  throw UsageError("--init must be 'zeros' or 'random', got '" + init + "'");
}

void run_init_weights(const WeightOptions& o, const RunContext& ctx) {
  const auto cfg = MapEncoderConfig::reference();
  const auto weights = init_weights(o.init, cfg, ctx.seed, o.scale);
  const fs::path dir = ctx.output_dir(o.out);
  weights.save(dir, cfg);
  Sidecar sidecar("cond init-weights");
  sidecar.params = {{"init", o.init}, {"seed", ctx.seed}, {"scale", o.scale}};
  sidecar.add_output(dir / "index.json");
  sidecar.write(sidecar_path_for_dir(dir));
  ctx.report(dir);
}

void run_encode(const EncodeOptions& o, const RunContext& ctx) {
  Sidecar sidecar("cond encode");
  const fs::path stack_path = ctx.input(o.stack);
  conditioning::ConditioningStack stack{io::read_npy_float(stack_path), o.fps};
  sidecar.add_input("stack", o.stack, stack_path);

  MapEncoderConfig cfg = MapEncoderConfig::reference();
  WeightStore weights;
  if (!o.weights.empty()) {
    const fs::path wdir = ctx.input(o.weights);
    std::tie(weights, cfg) = WeightStore::load(wdir);
    sidecar.add_input("weights", o.weights + "/index.json", wdir / "index.json");
    for (const auto& [name, _] : weights.params()) {
      sidecar.add_input("weights", o.weights + "/" + name + ".npy", wdir / (name + ".npy"));
    }
    sidecar.params = {{"weights", "file"}};
  } else {
    weights = init_weights(o.init, cfg, ctx.seed, o.scale);
    sidecar.params = {{"weights", o.init}, {"seed", ctx.seed}, {"scale", o.scale}};
  }
  sidecar.params["fps"] = o.fps;
  sidecar.params["pool"] = o.pool;

  const auto features = conditioning::map_encoder_forward(stack, cfg, weights);
  const fs::path dir = ctx.output_dir(o.out);
  fs::create_directories(dir / "features");
  fs::create_directories(dir / "film");
  json shapes = json::object();
  for (const auto& [site, feat] : features) {
    const std::string name = site.name();
    const fs::path fpath = dir / "features" / (name + ".npy");
    io::write_npy(feat, fpath);
    sidecar.add_output(fpath);
    shapes[name] = feat.shape();

    auto per_frame = conditioning::film_params(feat, site, cfg, weights);
    if (o.pool) per_frame = {conditioning::pool_film_params(per_frame)};
    const std::size_t c = per_frame.front().gamma_hat.size();
    TensorD film({per_frame.size(), 2, c});
    for (std::size_t t = 0; t < per_frame.size(); ++t) {
      auto slab = film.slab(t);
      std::copy(per_frame[t].gamma_hat.begin(), per_frame[t].gamma_hat.end(), slab.begin());
      std::copy(per_frame[t].beta_hat.begin(), per_frame[t].beta_hat.end(), slab.begin() + c);
    }
    const fs::path film_path = dir / "film" / (name + ".npy");
    io::write_npy(io::to_tensor_file(film), film_path);
    sidecar.add_output(film_path);
  }
  sidecar.params["feature_shapes"] = shapes;
  sidecar.write(sidecar_path_for_dir(dir));
  ctx.report(dir);
}

}  // namespace

void add_cond_commands(CLI::App& app, Registry& reg, RunContext& ctx) {
  auto* cond = app.add_subcommand("cond", "Conditioning signals: regions, BASD, stacks, encoder");
  cond->require_subcommand(1);

  auto ro = reg.make<RegionOptions>();
  auto* regions = cond->add_subcommand("regions", "Salient regions and viewpoints");
  regions->add_option("--saliency", ro->saliency, "Saliency NPY (T,H,W)")->required();
  regions->add_option("--fps", ro->fps)->capture_default_str();
  regions->add_option("--tau", ro->tau, "Threshold after min-max normalization")
      ->capture_default_str();
  regions->add_option("--min-region-fraction", ro->min_region_fraction)->capture_default_str();
  regions->add_option("--fov", ro->fov, "FoV in degrees, HxV")->capture_default_str();
  regions->add_option("--top-k", ro->top_k, "FoVs listed per frame")->capture_default_str();
  regions->add_option("--mode", ro->mode, "segment or per-frame")->capture_default_str();
  regions->add_flag("--uniform-centroid", ro->uniform_centroid, "Unweighted centroids");
  regions->add_option("--mask-out", ro->mask_out, "Optional thresholded mask NPY (T,H,W) u8");
  regions->add_option("--out", ro->out, "Output JSON")->required();
  reg.on(regions, [ro, &ctx] { run_regions(*ro, ctx); });

  auto bo = reg.make<BasdOptions>();
  auto* basd_cmd = cond->add_subcommand("basd", "Signed boundary distance maps");
  basd_cmd->add_option("--saliency", bo->saliency, "Saliency NPY; sets grid and frame count")
      ->required();
  basd_cmd->add_option("--regions", bo->regions, "Viewpoints from `cond regions`");
  basd_cmd->add_option("--center", bo->center, "'auto' (top-mass region) or LAT,LON degrees")
      ->capture_default_str();
  basd_cmd->add_option("--fov", bo->fov, "FoV in degrees, HxV")->capture_default_str();
  basd_cmd->add_option("--roll", bo->roll, "Roll, degrees")->capture_default_str();
  basd_cmd->add_option("--fps", bo->fps)->capture_default_str();
  basd_cmd->add_option("--tau", bo->tau)->capture_default_str();
  basd_cmd->add_option("--mode", bo->mode, "segment or per-frame")->capture_default_str();
  basd_cmd->add_option("--metric", bo->metric, "pixels or angular")->capture_default_str();
  basd_cmd->add_flag("--pgm", bo->pgm, "Also write packed 16-bit PGMs");
  basd_cmd->add_option("--out", bo->out, "Output NPY (T,H,W)")->required();
  reg.on(basd_cmd, [bo, &ctx] { run_basd(*bo, ctx); });

  auto so = reg.make<StackOptions>();
  auto* stack = cond->add_subcommand("stack", "Normalize and stack saliency and BASD");
  stack->add_option("--saliency", so->saliency)->required();
  stack->add_option("--basd", so->basd)->required();
  stack->add_option("--fps", so->fps)->capture_default_str();
  stack->add_option("--out", so->out, "Output NPY (T,2,H,W)")->required();
  reg.on(stack, [so, &ctx] { run_stack(*so, ctx); });

  auto eo = reg.make<EncodeOptions>();
  auto* encode = cond->add_subcommand("encode", "Map encoder forward pass and FiLM parameters");
  encode->add_option("--stack", eo->stack, "Stack NPY (T,2,H,W)")->required();
  encode->add_option("--weights", eo->weights, "Weight directory from `cond init-weights`");
  encode->add_option("--init", eo->init, "zeros or random when no --weights")
      ->capture_default_str();
  encode->add_option("--scale", eo->scale, "Uniform range for random init")
      ->capture_default_str();
  encode->add_option("--fps", eo->fps)->capture_default_str();
  encode->add_flag("--pool", eo->pool, "Pool FiLM parameters over time");
  encode->add_option("--out", eo->out, "Output directory")->required();
  reg.on(encode, [eo, &ctx] { run_encode(*eo, ctx); });

  auto wo = reg.make<WeightOptions>();
  auto* init = cond->add_subcommand("init-weights", "Write a reference weight directory");
  init->add_option("--init", wo->init, "zeros or random")->capture_default_str();
  init->add_option("--scale", wo->scale)->capture_default_str();
  init->add_option("--out", wo->out, "Output directory")->required();
  reg.on(init, [wo, &ctx] { run_init_weights(*wo, ctx); });
}

}  // namespace con360::cli

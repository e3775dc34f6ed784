#include <cstdio>
#include <string>

#include "con360/geometry.hpp"
#include "con360/io.hpp"
#include "con360/parallel.hpp"
#include "context.hpp"
#include "frames.hpp"

namespace con360::cli {
namespace {

struct CubeOptions {
  std::string in;
  std::size_t face_size = 256;
  std::string out;
  bool pgm = false;
};

struct ViewportOptions {
  std::string in;
  double lat = 0.0;
  double lon = 0.0;
  double hfov = 90.0;
  double vfov = 90.0;
  double roll = 0.0;
  std::string out_size = "256";
  std::string out;
  bool pgm = false;
};

std::string frame_stem(std::size_t t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame%05zu", t);
  return buf;
}

void run_cube(const CubeOptions& o, const RunContext& ctx) {
  if (o.face_size == 0) throw UsageError("--face-size must be positive");
  const fs::path in = ctx.input(o.in);
  const FrameStack stack(io::read_npy_float(in));
  const TensorF first = stack.frame(0);
  const geometry::ErpGrid grid(first.dim(first.rank() - 1), first.dim(first.rank() - 2));
  const fs::path dir = ctx.output_dir(o.out);

  Sidecar sidecar("project cube");
  sidecar.params = {{"face_size", o.face_size}, {"pgm", o.pgm}, {"frames", stack.frames()}};
  sidecar.add_input("frames", o.in, in);

  for (std::size_t t = 0; t < stack.frames(); ++t) {
    const TensorF frame = stack.frame(t);
    const auto faces = geometry::erp_to_cubemap(frame, o.face_size);
    for (auto face : geometry::kCubeFaces) {
      const auto& img = faces[static_cast<std::size_t>(face)];
      const std::string name = frame_stem(t) + "_" + std::string(geometry::cube_face_name(face));
      const fs::path npy = dir / (name + ".npy");
      io::write_npy(img, npy);
      sidecar.add_output(npy);
      if (o.pgm && img.rank() == 2) {
        const fs::path pgm = dir / (name + ".pgm");
        write_preview_pgm(img.data(), o.face_size, o.face_size, pgm);
        sidecar.add_output(pgm);
      }
    }
  }
  sidecar.write(sidecar_path_for_dir(dir));
  ctx.report(dir);
}

void run_viewport(const ViewportOptions& o, const RunContext& ctx) {
  std::size_t out_w = 0, out_h = 0;
  if (o.out_size.find('x') != std::string::npos) {
    const auto [w, h] = parse_pair(o.out_size, 'x', "--out-size");
    out_w = static_cast<std::size_t>(w);
    out_h = static_cast<std::size_t>(h);
  } else {
    out_w = out_h = static_cast<std::size_t>(parse_list(o.out_size, "--out-size").at(0));
  }
  if (out_w == 0 || out_h == 0) throw UsageError("--out-size must be positive");

  geometry::FovSpec fov;
  fov.center = {deg_to_rad(o.lat), deg_to_rad(o.lon)};
  fov.hfov = deg_to_rad(o.hfov);
  fov.vfov = deg_to_rad(o.vfov);
  fov.roll = deg_to_rad(o.roll);

  const fs::path in = ctx.input(o.in);
  const FrameStack stack(io::read_npy_float(in));
  std::vector<TensorF> views(stack.frames());
  for (std::size_t t = 0; t < stack.frames(); ++t) {
    views[t] = geometry::extract_viewport(stack.frame(t), fov, out_w, out_h);
  }
  const TensorF result = stack.assemble(views);

  const fs::path out = ctx.output(o.out);
  io::write_npy(result, out);
  Sidecar sidecar("project viewport");
  sidecar.params = {{"lat_deg", o.lat},   {"lon_deg", o.lon},   {"hfov_deg", o.hfov},
                    {"vfov_deg", o.vfov}, {"roll_deg", o.roll}, {"out_width", out_w},
                    {"out_height", out_h}};
  sidecar.add_input("frames", o.in, in);
  sidecar.add_output(out);
  if (o.pgm && views.front().rank() == 2) {
    for (std::size_t t = 0; t < views.size(); ++t) {
      const fs::path pgm = out.parent_path() / (out.stem().string() + "_" + frame_stem(t) + ".pgm");
      write_preview_pgm(views[t].data(), out_w, out_h, pgm);
      sidecar.add_output(pgm);
    }
  }
  sidecar.write(sidecar_path_for_file(out));
  ctx.report(out);
}

}  // namespace

void add_project_commands(CLI::App& app, Registry& reg, RunContext& ctx) {
  auto* project = app.add_subcommand("project", "ERP projections: cubemap faces and viewports");
  project->require_subcommand(1);

  auto co = reg.make<CubeOptions>();
  auto* cube = project->add_subcommand("cube", "Render the six cube faces of every frame");
  cube->add_option("--in", co->in, "ERP frames NPY: (H,W), (T,H,W) or (T,C,H,W)")->required();
  cube->add_option("--face-size", co->face_size, "Face edge in pixels")->capture_default_str();
  cube->add_option("--out", co->out, "Output directory")->required();
  cube->add_flag("--pgm", co->pgm, "Also write 16-bit PGM previews");
  reg.on(cube, [co, &ctx] { run_cube(*co, ctx); });

  auto vo = reg.make<ViewportOptions>();
  auto* vp = project->add_subcommand("viewport", "Gnomonic viewport extraction");
  vp->add_option("--in", vo->in, "ERP frames NPY")->required();
  vp->add_option("--lat", vo->lat, "View center latitude, degrees")->capture_default_str();
  vp->add_option("--lon", vo->lon, "View center longitude, degrees")->capture_default_str();
  vp->add_option("--hfov", vo->hfov, "Horizontal FoV, degrees")->capture_default_str();
  vp->add_option("--vfov", vo->vfov, "Vertical FoV, degrees")->capture_default_str();
  vp->add_option("--roll", vo->roll, "Roll about the view axis, degrees")->capture_default_str();
  vp->add_option("--out-size", vo->out_size, "N or WxH")->capture_default_str();
  vp->add_option("--out", vo->out, "Output NPY")->required();
  vp->add_flag("--pgm", vo->pgm, "Also write 16-bit PGM previews");
  reg.on(vp, [vo, &ctx] { run_viewport(*vo, ctx); });
}

}  // namespace con360::cli

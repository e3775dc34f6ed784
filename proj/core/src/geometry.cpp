#include "con360/geometry.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "con360/parallel.hpp"

namespace con360::geometry {
namespace {

Direction add_scaled(const Direction& base, double a, const Direction& ra,
                     double b, const Direction& rb) {
  return {base.x + a * ra.x + b * rb.x, base.y + a * ra.y + b * rb.y,
          base.z + a * ra.z + b * rb.z};
}

struct ImageLayout {
  std::size_t channels;
  std::size_t height;
  std::size_t width;
};

ImageLayout image_layout(const TensorF& image) {
  if (image.rank() == 2) return {1, image.dim(0), image.dim(1)};
  if (image.rank() == 3) return {image.dim(0), image.dim(1), image.dim(2)};
  raise(ErrorKind::kShape, "image must be (H, W) or (C, H, W), got " +
                               shape_to_string(image.shape()));
}

ImageLayout erp_layout(const TensorF& frame) {
  const ImageLayout layout = image_layout(frame);
  ErpGrid{layout.width, layout.height};  // validates 2:1
  return layout;
}

TensorF make_image(const TensorF& like, std::size_t channels, std::size_t h,
                   std::size_t w) {
  if (like.rank() == 2) return TensorF({h, w});
  return TensorF({channels, h, w});
}

// Renders an out_h x out_w perspective image where pixel (i, j) looks along
// ray(i, j). Rows are distributed over the worker pool.
template <typename RayFn>
TensorF render_rays(const TensorF& frame, std::size_t out_w, std::size_t out_h,
                    RayFn&& ray) {
  const ImageLayout in = erp_layout(frame);
  const ErpGrid grid(in.width, in.height);
  TensorF out = make_image(frame, in.channels, out_h, out_w);
  const std::size_t in_plane = in.width * in.height;
  const std::size_t out_plane = out_w * out_h;
  const auto src = frame.data();
  auto dst = out.data();
  parallel_for(out_h, [&](std::size_t j) {
    for (std::size_t i = 0; i < out_w; ++i) {
      const ErpPoint p =
          latlon_to_erp_pixel(direction_to_latlon(ray(i, j)), grid);
      for (std::size_t c = 0; c < in.channels; ++c) {
        dst[c * out_plane + j * out_w + i] = static_cast<float>(
            sample_bilinear_wrapped(src.subspan(c * in_plane, in_plane),
                                    in.width, in.height, p));
      }
    }
  });
  return out;
}

struct FaceAxes {
  Direction forward;
  Direction right;
  Direction up;
};

// Fixed per-face axes; the image-right/up vectors agree with view_basis() at
// each face center with roll 0.
FaceAxes face_axes(CubeFace face) {
  switch (face) {
    case CubeFace::kFront: return {{1, 0, 0}, {0, -1, 0}, {0, 0, 1}};
    case CubeFace::kBack: return {{-1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    case CubeFace::kLeft: return {{0, 1, 0}, {1, 0, 0}, {0, 0, 1}};
    case CubeFace::kRight: return {{0, -1, 0}, {-1, 0, 0}, {0, 0, 1}};
    case CubeFace::kTop: return {{0, 0, 1}, {0, -1, 0}, {-1, 0, 0}};
    case CubeFace::kBottom: return {{0, 0, -1}, {0, -1, 0}, {1, 0, 0}};
  }
  raise(ErrorKind::kInvalidInput, "unknown cube face");
}

bool is_gnomonic(const FovSpec& fov) { return fov.hfov < kPi && fov.vfov < kPi; }

}  // namespace

double wrap_longitude(double lon) {
  double wrapped = lon - kTwoPi * std::floor((lon + kPi) / kTwoPi);
  if (wrapped >= kPi) wrapped -= kTwoPi;
  if (wrapped < -kPi) wrapped = -kPi;
  return wrapped;
}

double Direction::norm() const { return std::sqrt(x * x + y * y + z * z); }

ErpGrid::ErpGrid(std::size_t width, std::size_t height)
    : width_(width), height_(height) {
  if (width < 2 || width != 2 * height) {
    raise(ErrorKind::kAspect, "ERP grid must be 2:1 with width >= 2, got " +
                                  std::to_string(width) + "x" +
                                  std::to_string(height));
  }
}

void validate_fov(const FovSpec& fov) {
  if (!(fov.hfov > 0.0 && fov.hfov <= kTwoPi)) {
    raise(ErrorKind::kParameter, "hfov must lie in (0, 2pi]");
  }
  if (!(fov.vfov > 0.0 && fov.vfov <= kPi)) {
    raise(ErrorKind::kParameter, "vfov must lie in (0, pi]");
  }
  if (!(std::abs(fov.center.lat) <= kPi / 2) || !std::isfinite(fov.center.lon) ||
      !std::isfinite(fov.roll)) {
    raise(ErrorKind::kParameter, "FoV center/roll out of range");
  }
}

std::string_view cube_face_name(CubeFace face) {
  switch (face) {
    case CubeFace::kFront: return "front";
    case CubeFace::kBack: return "back";
    case CubeFace::kLeft: return "left";
    case CubeFace::kRight: return "right";
    case CubeFace::kTop: return "top";
    case CubeFace::kBottom: return "bottom";
  }
  return "unknown";
}

CubeFace cube_face_from_name(std::string_view name) {
  for (CubeFace face : kCubeFaces) {
    if (cube_face_name(face) == name) return face;
  }
  raise(ErrorKind::kInvalidInput,
        "unknown cube face '" + std::string(name) + "'");
}

LatLon erp_pixel_to_latlon(std::size_t u, std::size_t v, const ErpGrid& grid) {
  if (u >= grid.width() || v >= grid.height()) {
    raise(ErrorKind::kBounds, "pixel (" + std::to_string(u) + ", " +
                                  std::to_string(v) + ") outside " +
                                  std::to_string(grid.width()) + "x" +
                                  std::to_string(grid.height()) + " grid");
  }
  const double w = static_cast<double>(grid.width());
  const double h = static_cast<double>(grid.height());
  return {(0.5 - (static_cast<double>(v) + 0.5) / h) * kPi,
          ((static_cast<double>(u) + 0.5) / w - 0.5) * kTwoPi};
}

ErpPoint latlon_to_erp_pixel(const LatLon& p, const ErpGrid& grid) {
  const double w = static_cast<double>(grid.width());
  const double h = static_cast<double>(grid.height());
  return {(p.lon / kTwoPi + 0.5) * w - 0.5, (0.5 - p.lat / kPi) * h - 0.5};
}

Direction latlon_to_direction(const LatLon& p) {
  const double c = std::cos(p.lat);
  return {c * std::cos(p.lon), c * std::sin(p.lon), std::sin(p.lat)};
}

LatLon direction_to_latlon(const Direction& d) {
  const double n = d.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    raise(ErrorKind::kInvalidInput, "direction has zero or non-finite norm");
  }
  const double x = d.x / n;
  const double y = d.y / n;
  const double z = d.z / n;
  const double horizontal = std::hypot(x, y);
  if (horizontal == 0.0) return {z > 0 ? kPi / 2 : -kPi / 2, 0.0};
  return {std::atan2(z, horizontal), wrap_longitude(std::atan2(y, x))};
}

ViewBasis view_basis(const FovSpec& fov) {
  const double sl = std::sin(fov.center.lat);
  const double cl = std::cos(fov.center.lat);
  const double so = std::sin(fov.center.lon);
  const double co = std::cos(fov.center.lon);
  const Direction forward{cl * co, cl * so, sl};
  const Direction right{so, -co, 0.0};
  const Direction up{-sl * co, -sl * so, cl};
  if (fov.roll == 0.0) return {forward, right, up};
  const double cr = std::cos(fov.roll);
  const double sr = std::sin(fov.roll);
  return {forward,
          {cr * right.x + sr * up.x, cr * right.y + sr * up.y,
           cr * right.z + sr * up.z},
          {-sr * right.x + cr * up.x, -sr * right.y + cr * up.y,
           -sr * right.z + cr * up.z}};
}

FrustumCoords frustum_coords(const Direction& d, const FovSpec& fov) {
  const ViewBasis basis = view_basis(fov);
  const double f = d.dot(basis.forward);
  if (f <= 0.0) return {0.0, 0.0, f};
  return {d.dot(basis.right) / f, d.dot(basis.up) / f, f};
}

bool is_inside_fov(const Direction& d, const FovSpec& fov) {
  if (fov.is_full_sphere()) return true;
  const FrustumCoords c = frustum_coords(d, fov);
  if (c.forward <= 0.0) return false;
  if (fov.hfov < kPi && std::abs(c.x) > std::tan(fov.hfov / 2)) return false;
  if (fov.vfov < kPi && std::abs(c.y) > std::tan(fov.vfov / 2)) return false;
  return true;
}

double sample_bilinear_wrapped(std::span<const float> plane, std::size_t width,
                               std::size_t height, const ErpPoint& p) {
  const double uf = std::floor(p.u);
  const double t = p.u - uf;
  const auto w = static_cast<long long>(width);
  long long i0 = static_cast<long long>(uf) % w;
  if (i0 < 0) i0 += w;
  const long long i1 = (i0 + 1) % w;

  const double v = std::clamp(p.v, 0.0, static_cast<double>(height - 1));
  const double vf = std::floor(v);
  const double s = v - vf;
  const auto r0 = static_cast<std::size_t>(vf);
  const std::size_t r1 = std::min(r0 + 1, height - 1);

  auto at = [&](std::size_t r, long long c) {
    return static_cast<double>(plane[r * width + static_cast<std::size_t>(c)]);
  };
  const double a0 = at(r0, i0);
  const double top = a0 + t * (at(r0, i1) - a0);
  const double b0 = at(r1, i0);
  const double bottom = b0 + t * (at(r1, i1) - b0);
  return top + s * (bottom - top);
}

TensorF cube_face(const TensorF& frame, CubeFace face, std::size_t face_size) {
  if (face_size == 0) raise(ErrorKind::kParameter, "face_size must be >= 1");
  const FaceAxes axes = face_axes(face);
  const double n = static_cast<double>(face_size);
  return render_rays(frame, face_size, face_size,
                     [&](std::size_t i, std::size_t j) {
                       const double a = 2.0 * (static_cast<double>(i) + 0.5) / n - 1.0;
                       const double b = 1.0 - 2.0 * (static_cast<double>(j) + 0.5) / n;
                       return add_scaled(axes.forward, a, axes.right, b, axes.up);
                     });
}

std::array<TensorF, 6> erp_to_cubemap(const TensorF& frame,
                                      std::size_t face_size) {
  erp_layout(frame);
  std::array<TensorF, 6> faces;
  for (std::size_t k = 0; k < kCubeFaces.size(); ++k) {
    faces[k] = cube_face(frame, kCubeFaces[k], face_size);
  }
  return faces;
}

TensorF extract_viewport(const TensorF& frame, const FovSpec& fov,
                         std::size_t out_w, std::size_t out_h) {
  validate_fov(fov);
  if (!is_gnomonic(fov)) {
    raise(ErrorKind::kProjectionDomain,
          "gnomonic viewport requires hfov < 180 deg and vfov < 180 deg");
  }
  if (out_w == 0 || out_h == 0) {
    raise(ErrorKind::kParameter, "viewport size must be >= 1");
  }
  const ViewBasis basis = view_basis(fov);
  const double tx = std::tan(fov.hfov / 2);
  const double ty = std::tan(fov.vfov / 2);
  const double w = static_cast<double>(out_w);
  const double h = static_cast<double>(out_h);
  return render_rays(frame, out_w, out_h, [&](std::size_t i, std::size_t j) {
    const double a = (2.0 * (static_cast<double>(i) + 0.5) / w - 1.0) * tx;
    const double b = (1.0 - 2.0 * (static_cast<double>(j) + 0.5) / h) * ty;
    return add_scaled(basis.forward, a, basis.right, b, basis.up);
  });
}

BoundaryPolyline project_fov_boundary(const FovSpec& fov, const ErpGrid& grid,
                                      std::size_t samples_per_edge) {
  validate_fov(fov);
  if (fov.is_full_sphere()) {
    raise(ErrorKind::kNoBoundary, "a full-sphere FoV has no boundary");
  }
  if (!is_gnomonic(fov)) {
    raise(ErrorKind::kProjectionDomain,
          "boundary sampling requires hfov < 180 deg and vfov < 180 deg");
  }
  if (samples_per_edge < 2) {
    raise(ErrorKind::kParameter, "samples_per_edge must be >= 2");
  }
  const ViewBasis basis = view_basis(fov);
  const double tx = std::tan(fov.hfov / 2);
  const double ty = std::tan(fov.vfov / 2);
  const double last = static_cast<double>(samples_per_edge - 1);

  BoundaryPolyline line;
  line.points.reserve(4 * (samples_per_edge - 1));
  auto push = [&](double a, double b) {
    const Direction ray = add_scaled(basis.forward, a, basis.right, b, basis.up);
    const double n = ray.norm();
    BoundarySample sample;
    sample.direction = {ray.x / n, ray.y / n, ray.z / n};
    sample.latlon = direction_to_latlon(sample.direction);
    sample.erp = latlon_to_erp_pixel(sample.latlon, grid);
    line.points.push_back(sample);
  };
  for (int edge = 0; edge < 4; ++edge) {
    for (std::size_t k = 0; k + 1 < samples_per_edge; ++k) {
      const double s = -1.0 + 2.0 * static_cast<double>(k) / last;
      switch (edge) {
        case 0: push(s * tx, ty); break;
        case 1: push(tx, -s * ty); break;
        case 2: push(-s * tx, -ty); break;
        default: push(-tx, s * ty); break;
      }
    }
  }
  const std::size_t count = line.points.size();
  for (std::size_t i = 0; i < count; ++i) {
    const double a = line.points[i].latlon.lon;
    const double b = line.points[(i + 1) % count].latlon.lon;
    if (std::abs(b - a) > kPi) line.seam_crossings.push_back(i);
  }
  return line;
}

}  // namespace con360::geometry

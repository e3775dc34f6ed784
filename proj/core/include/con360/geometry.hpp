#pragma once

#include <array>
#include <cstddef>
#include <numbers>
#include <string_view>
#include <vector>

#include "con360/tensor.hpp"

// Spherical and planar coordinate math on equirectangular (ERP) frames.
//
// Frame: right-handed, +x front, +y left, +z up. Longitude grows toward +y,
// latitude toward +z. ERP column 0 starts at lon = -pi, row 0 at lat = +pi/2,
// and every pixel is addressed by its center ((u + 0.5) / W).
namespace con360::geometry {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Wraps an angle into [-pi, pi).
double wrap_longitude(double lon);

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
};

struct Direction {
  double x = 1.0;
  double y = 0.0;
  double z = 0.0;

  double dot(const Direction& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const;
};

// Continuous ERP position in pixel units (pixel centers at integer + 0.5 - 0.5).
struct ErpPoint {
  double u = 0.0;
  double v = 0.0;
};

class ErpGrid {
 public:
  // Throws kAspect unless width == 2 * height and width >= 2.
  ErpGrid(std::size_t width, std::size_t height);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t pixels() const noexcept { return width_ * height_; }

  bool operator==(const ErpGrid&) const = default;

 private:
  std::size_t width_;
  std::size_t height_;
};

struct FovSpec {
  LatLon center;
  double hfov = kPi / 2;  // radians, (0, 2pi]
  double vfov = kPi / 2;  // radians, (0, pi]
  double roll = 0.0;      // radians, rotation about the view axis

  bool is_full_sphere() const { return hfov >= kTwoPi && vfov >= kPi; }
};

// Throws kParameter for non-positive or oversized angles.
void validate_fov(const FovSpec& fov);

enum class CubeFace { kFront, kBack, kLeft, kRight, kTop, kBottom };

inline constexpr std::array<CubeFace, 6> kCubeFaces = {
    CubeFace::kFront, CubeFace::kBack, CubeFace::kLeft,
    CubeFace::kRight, CubeFace::kTop,  CubeFace::kBottom};

std::string_view cube_face_name(CubeFace face);
// Throws kInvalidInput for names outside the six faces.
CubeFace cube_face_from_name(std::string_view name);

LatLon erp_pixel_to_latlon(std::size_t u, std::size_t v, const ErpGrid& grid);
ErpPoint latlon_to_erp_pixel(const LatLon& p, const ErpGrid& grid);

Direction latlon_to_direction(const LatLon& p);
// Normalizes its input; throws kInvalidInput on a zero or non-finite vector.
// Poles return lon = 0.
LatLon direction_to_latlon(const Direction& d);

// Orthonormal viewing basis of a FoV: forward axis, image-right, image-up.
struct ViewBasis {
  Direction forward;
  Direction right;
  Direction up;
};

ViewBasis view_basis(const FovSpec& fov);

// Gnomonic coordinates of d in the FoV's tangent plane. `forward` is the
// component along the view axis; x and y are only meaningful when it is > 0.
struct FrustumCoords {
  double x = 0.0;
  double y = 0.0;
  double forward = 0.0;
};

FrustumCoords frustum_coords(const Direction& d, const FovSpec& fov);

// True iff d lies in the FoV frustum. A full-sphere FoV contains everything;
// an axis whose angle reaches pi is unbounded within the forward hemisphere.
bool is_inside_fov(const Direction& d, const FovSpec& fov);

// Bilinear sample of one channel plane (height x width) at a continuous ERP
// position, wrapping horizontally and clamping vertically.
double sample_bilinear_wrapped(std::span<const float> plane, std::size_t width,
                               std::size_t height, const ErpPoint& p);

// Images are tensors shaped (H, W) or (C, H, W); outputs keep the input rank.
// Throws kAspect unless the frame is 2:1.
std::array<TensorF, 6> erp_to_cubemap(const TensorF& frame,
                                      std::size_t face_size);

TensorF cube_face(const TensorF& frame, CubeFace face, std::size_t face_size);

// Gnomonic viewport; throws kProjectionDomain when hfov or vfov >= pi.
TensorF extract_viewport(const TensorF& frame, const FovSpec& fov,
                         std::size_t out_w, std::size_t out_h);

struct BoundarySample {
  ErpPoint erp;
  LatLon latlon;
  Direction direction;
};

struct BoundaryPolyline {
  // Closed loop, corners first on each edge: top (left to right), right (top
  // to bottom), bottom (right to left), left (bottom to top). 4*(n-1) points.
  std::vector<BoundarySample> points;
  // Indices i where the segment points[i] -> points[(i+1) % size] crosses the
  // lon = +-pi seam.
  std::vector<std::size_t> seam_crossings;

  bool crosses_seam() const { return !seam_crossings.empty(); }
};

// Throws kNoBoundary for a full-sphere FoV, kProjectionDomain when the FoV is
// not gnomonic, kParameter when samples_per_edge < 2.
BoundaryPolyline project_fov_boundary(const FovSpec& fov, const ErpGrid& grid,
                                      std::size_t samples_per_edge);

}  // namespace con360::geometry

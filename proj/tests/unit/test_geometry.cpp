#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "con360/geometry.hpp"
#include "oracles.hpp"

namespace geo = con360::geometry;
using con360::ErrorKind;
using con360::TensorF;
using geo::kPi;

namespace {

template <typename Fn>
ErrorKind kind_of(Fn&& fn) {
  try {
    fn();
  } catch (const con360::Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorKind::kParse;
}

TensorF smooth_frame(std::size_t h) {
  return TensorF({h, 2 * h}, con360::testing::render_smooth_erp(h, 2 * h));
}

}  // namespace

TEST(ErpMapping, PixelCenterExamples) {
  const geo::ErpGrid g42(4, 2);
  auto p = geo::erp_pixel_to_latlon(2, 1, g42);
  EXPECT_DOUBLE_EQ(p.lat, -kPi / 4);
  EXPECT_DOUBLE_EQ(p.lon, kPi / 4);

  const geo::ErpGrid g21(2, 1);
  p = geo::erp_pixel_to_latlon(0, 0, g21);
  EXPECT_DOUBLE_EQ(p.lat, 0.0);
  EXPECT_DOUBLE_EQ(p.lon, -kPi / 2);

  const auto c = geo::latlon_to_erp_pixel({0.0, 0.0}, g42);
  EXPECT_DOUBLE_EQ(c.u, 1.5);
  EXPECT_DOUBLE_EQ(c.v, 0.5);
  EXPECT_DOUBLE_EQ(geo::latlon_to_erp_pixel({kPi / 2, 1.0}, g42).v, -0.5);

  const auto edge = geo::latlon_to_erp_pixel({0.0, kPi - 1e-9}, g42);
  EXPECT_LT(edge.u, 3.5);
  EXPECT_GT(edge.u, 3.5 - 1e-8);
}

TEST(ErpMapping, ExhaustiveRoundTrip) {
  const geo::ErpGrid grid(16, 8);
  for (std::size_t v = 0; v < 8; ++v) {
    for (std::size_t u = 0; u < 16; ++u) {
      const auto p = geo::latlon_to_erp_pixel(geo::erp_pixel_to_latlon(u, v, grid), grid);
      EXPECT_NEAR(p.u, static_cast<double>(u), 1e-12);
      EXPECT_NEAR(p.v, static_cast<double>(v), 1e-12);
    }
  }
}

TEST(ErpMapping, Errors) {
  EXPECT_EQ(kind_of([] { geo::ErpGrid(30, 10); }), ErrorKind::kAspect);
  EXPECT_EQ(kind_of([] { geo::ErpGrid(0, 0); }), ErrorKind::kAspect);
  const geo::ErpGrid grid(16, 8);
  EXPECT_EQ(kind_of([&] { geo::erp_pixel_to_latlon(16, 0, grid); }), ErrorKind::kBounds);
  EXPECT_EQ(kind_of([&] { geo::erp_pixel_to_latlon(0, 8, grid); }), ErrorKind::kBounds);
}

TEST(Directions, AxisExamples) {
  auto d = geo::latlon_to_direction({0.0, 0.0});
  EXPECT_DOUBLE_EQ(d.x, 1.0);
  EXPECT_DOUBLE_EQ(d.y, 0.0);
  d = geo::latlon_to_direction({kPi / 2, 2.0});
  EXPECT_NEAR(d.x, 0.0, 1e-16);
  EXPECT_NEAR(d.y, 0.0, 1e-16);
  EXPECT_DOUBLE_EQ(d.z, 1.0);
  d = geo::latlon_to_direction({0.0, kPi / 2});
  EXPECT_NEAR(d.x, 0.0, 1e-16);
  EXPECT_DOUBLE_EQ(d.y, 1.0);

  const auto pole = geo::direction_to_latlon({0.0, 0.0, -3.0});
  EXPECT_DOUBLE_EQ(pole.lat, -kPi / 2);
  EXPECT_EQ(pole.lon, 0.0);
  EXPECT_EQ(kind_of([] { geo::direction_to_latlon({0.0, 0.0, 0.0}); }), ErrorKind::kInvalidInput);
}

TEST(Directions, RandomRoundTrip) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lat(-kPi / 2 + 1e-6, kPi / 2 - 1e-6), lon(-kPi, kPi);
  for (int i = 0; i < 10000; ++i) {
    const geo::LatLon p{lat(rng), lon(rng)};
    const auto d = geo::latlon_to_direction(p);
    ASSERT_NEAR(d.norm(), 1.0, 1e-12);
    const auto q = geo::direction_to_latlon(d);
    ASSERT_NEAR(q.lat, p.lat, 1e-12);
    ASSERT_NEAR(std::remainder(q.lon - p.lon, 2 * kPi), 0.0, 1e-12);
    ASSERT_GE(q.lon, -kPi);
    ASSERT_LT(q.lon, kPi);
  }
}

TEST(Directions, WrapLongitudeHalfOpen) {
  EXPECT_DOUBLE_EQ(geo::wrap_longitude(kPi), -kPi);
  EXPECT_DOUBLE_EQ(geo::wrap_longitude(-kPi), -kPi);
  EXPECT_NEAR(geo::wrap_longitude(3 * kPi / 2), -kPi / 2, 1e-15);
  EXPECT_NEAR(geo::wrap_longitude(-5.0 * kPi / 2), -kPi / 2, 1e-14);
}

TEST(ViewBasis, OrthonormalWithRoll) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> lat(-1.5, 1.5), lon(-kPi, kPi), roll(-3, 3);
  for (int i = 0; i < 200; ++i) {
    geo::FovSpec fov;
    fov.center = {lat(rng), lon(rng)};
    fov.roll = roll(rng);
    const auto b = geo::view_basis(fov);
    EXPECT_NEAR(b.forward.norm(), 1.0, 1e-12);
    EXPECT_NEAR(b.right.norm(), 1.0, 1e-12);
    EXPECT_NEAR(b.up.norm(), 1.0, 1e-12);
    EXPECT_NEAR(b.forward.dot(b.right), 0.0, 1e-12);
    EXPECT_NEAR(b.forward.dot(b.up), 0.0, 1e-12);
    EXPECT_NEAR(b.right.dot(b.up), 0.0, 1e-12);
    // right x up = forward keeps the frame right-handed as seen by the viewer.
    const geo::Direction cross{b.right.y * b.up.z - b.right.z * b.up.y,
                               b.right.z * b.up.x - b.right.x * b.up.z,
                               b.right.x * b.up.y - b.right.y * b.up.x};
    EXPECT_NEAR(cross.dot(b.forward), -1.0, 1e-12);
  }
}

TEST(InsideFov, Examples) {
  geo::FovSpec fov;
  fov.center = {0.3, 2.0};
  const auto center = geo::latlon_to_direction(fov.center);
  EXPECT_TRUE(geo::is_inside_fov(center, fov));
  EXPECT_FALSE(geo::is_inside_fov({-center.x, -center.y, -center.z}, fov));
  geo::FovSpec sphere;
  sphere.hfov = 2 * kPi;
  sphere.vfov = kPi;
  EXPECT_TRUE(geo::is_inside_fov({-1.0, 0.0, 0.0}, sphere));
  EXPECT_TRUE(geo::is_inside_fov({0.0, 0.0, -1.0}, sphere));
}

TEST(InsideFov, MatchesGnomonicBounds) {
  geo::FovSpec fov;
  fov.hfov = 1.2;
  fov.vfov = 0.8;
  // Directions built in the local frame at (0, 0): forward x, right -y, up z.
  for (double a : {-0.99, -0.5, 0.0, 0.5, 0.99}) {
    for (double b : {-0.99, 0.0, 0.99}) {
      const double x = a * std::tan(0.6);
      const double y = b * std::tan(0.4);
      EXPECT_TRUE(geo::is_inside_fov({1.0, -x, y}, fov));
    }
  }
  EXPECT_FALSE(geo::is_inside_fov({1.0, -std::tan(0.6) * 1.001, 0.0}, fov));
  EXPECT_FALSE(geo::is_inside_fov({1.0, 0.0, std::tan(0.4) * 1.001}, fov));
  EXPECT_TRUE(geo::is_inside_fov({1.0, -std::tan(0.6) * 0.999, std::tan(0.4) * 0.999}, fov));
}

TEST(Cubemap, ConstantFrameGivesConstantFaces) {
  const TensorF frame({3, 16, 32}, 0.37f);
  for (const auto& face : geo::erp_to_cubemap(frame, 9)) {
    ASSERT_EQ(face.shape(), (con360::Shape{3, 9, 9}));
    for (float v : face.data()) ASSERT_EQ(v, 0.37f);
  }
}

TEST(Cubemap, FaceCentersLookAlongAxes) {
  // A field equal to x, y or z reads back +-1 at the matching face centers.
  const std::size_t h = 64;
  std::vector<float> fx(h * 2 * h), fy(fx.size()), fz(fx.size());
  const geo::ErpGrid grid(2 * h, h);
  for (std::size_t v = 0; v < h; ++v) {
    for (std::size_t u = 0; u < 2 * h; ++u) {
      const auto d = geo::latlon_to_direction(geo::erp_pixel_to_latlon(u, v, grid));
      fx[v * 2 * h + u] = static_cast<float>(d.x);
      fy[v * 2 * h + u] = static_cast<float>(d.y);
      fz[v * 2 * h + u] = static_cast<float>(d.z);
    }
  }
  const std::size_t n = 33;  // odd so one pixel sits on the axis
  auto center = [&](const std::vector<float>& f, geo::CubeFace face) {
    return geo::cube_face(TensorF({h, 2 * h}, f), face, n)[(n / 2) * n + n / 2];
  };
  EXPECT_NEAR(center(fx, geo::CubeFace::kFront), 1.0, 2e-3);
  EXPECT_NEAR(center(fx, geo::CubeFace::kBack), -1.0, 2e-3);
  EXPECT_NEAR(center(fy, geo::CubeFace::kLeft), 1.0, 2e-3);
  EXPECT_NEAR(center(fy, geo::CubeFace::kRight), -1.0, 2e-3);
  EXPECT_NEAR(center(fz, geo::CubeFace::kTop), 1.0, 2e-3);
  EXPECT_NEAR(center(fz, geo::CubeFace::kBottom), -1.0, 2e-3);

  // Image-right on the front face points toward -y; image-up toward +z.
  const auto front_y = geo::cube_face(TensorF({h, 2 * h}, fy), geo::CubeFace::kFront, n);
  EXPECT_GT(front_y[(n / 2) * n + 0], front_y[(n / 2) * n + n - 1]);
  const auto front_z = geo::cube_face(TensorF({h, 2 * h}, fz), geo::CubeFace::kFront, n);
  EXPECT_GT(front_z[0 * n + n / 2], front_z[(n - 1) * n + n / 2]);
}

TEST(Cubemap, NamesRoundTrip) {
  for (auto face : geo::kCubeFaces) {
    EXPECT_EQ(geo::cube_face_from_name(geo::cube_face_name(face)), face);
  }
  EXPECT_EQ(kind_of([] { geo::cube_face_from_name("side"); }), ErrorKind::kInvalidInput);
}

TEST(Cubemap, AspectError) {
  EXPECT_EQ(kind_of([] { geo::erp_to_cubemap(TensorF({10, 30}), 4); }), ErrorKind::kAspect);
}

namespace {

// Test-side cubemap-to-ERP resampler with its own face table (major-axis
// selection), used to check that the library's faces invert it.
double sample_face(const std::vector<float>& face, std::size_t n, double a, double b) {
  const double i = (a + 1.0) * static_cast<double>(n) / 2.0 - 0.5;
  const double j = (1.0 - b) * static_cast<double>(n) / 2.0 - 0.5;
  const double ic = std::clamp(i, 0.0, static_cast<double>(n - 1));
  const double jc = std::clamp(j, 0.0, static_cast<double>(n - 1));
  const auto i0 = static_cast<std::size_t>(std::floor(ic));
  const auto j0 = static_cast<std::size_t>(std::floor(jc));
  const std::size_t i1 = std::min(i0 + 1, n - 1), j1 = std::min(j0 + 1, n - 1);
  const double ti = ic - static_cast<double>(i0), tj = jc - static_cast<double>(j0);
  const double top = face[j0 * n + i0] * (1 - ti) + face[j0 * n + i1] * ti;
  const double bot = face[j1 * n + i0] * (1 - ti) + face[j1 * n + i1] * ti;
  return top * (1 - tj) + bot * tj;
}

}  // namespace

TEST(Cubemap, ResampledCubemapRoundTripPsnr) {
  const std::size_t n = 128;
  const double pi = kPi;
  // Faces rendered straight from the analytic field.
  std::array<std::vector<float>, 6> faces;
  const double axes[6][3][3] = {
      {{1, 0, 0}, {0, -1, 0}, {0, 0, 1}},  {{-1, 0, 0}, {0, 1, 0}, {0, 0, 1}},
      {{0, 1, 0}, {1, 0, 0}, {0, 0, 1}},   {{0, -1, 0}, {-1, 0, 0}, {0, 0, 1}},
      {{0, 0, 1}, {0, -1, 0}, {-1, 0, 0}}, {{0, 0, -1}, {0, -1, 0}, {1, 0, 0}}};
  for (int f = 0; f < 6; ++f) {
    faces[f].resize(n * n);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        const double a = 2.0 * (i + 0.5) / n - 1.0, b = 1.0 - 2.0 * (j + 0.5) / n;
        double d[3];
        for (int k = 0; k < 3; ++k) d[k] = axes[f][0][k] + a * axes[f][1][k] + b * axes[f][2][k];
        const double norm = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
        faces[f][j * n + i] =
            static_cast<float>(con360::testing::smooth_field(d[0] / norm, d[1] / norm, d[2] / norm));
      }
    }
  }
  // ERP frame resampled from those faces.
  const std::size_t h = 256, w = 512;
  std::vector<float> erp(h * w);
  for (std::size_t v = 0; v < h; ++v) {
    for (std::size_t u = 0; u < w; ++u) {
      const double lat = pi / 2 - (v + 0.5) * pi / h;
      const double lon = -pi + (u + 0.5) * 2 * pi / w;
      const double d[3] = {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon),
                           std::sin(lat)};
      int best = 0;
      double best_dot = -2;
      for (int f = 0; f < 6; ++f) {
        const double dot = d[0] * axes[f][0][0] + d[1] * axes[f][0][1] + d[2] * axes[f][0][2];
        if (dot > best_dot) {
          best_dot = dot;
          best = f;
        }
      }
      double a = 0, b = 0;
      for (int k = 0; k < 3; ++k) {
        a += d[k] * axes[best][1][k];
        b += d[k] * axes[best][2][k];
      }
      erp[v * w + u] = static_cast<float>(sample_face(faces[best], n, a / best_dot, b / best_dot));
    }
  }
  const auto back = geo::erp_to_cubemap(TensorF({h, w}, erp), n);
  double se = 0.0, peak = 0.0;
  for (int f = 0; f < 6; ++f) {
    for (std::size_t i = 0; i < n * n; ++i) {
      const double diff = back[f][i] - faces[f][i];
      se += diff * diff;
      peak = std::max(peak, static_cast<double>(std::abs(faces[f][i])));
    }
  }
  const double mse = se / (6.0 * n * n);
  const double psnr = 10.0 * std::log10(peak * peak / mse);
  EXPECT_GE(psnr, 35.0);
}

TEST(Viewport, ConstantAndCenter) {
  const TensorF flat({8, 16}, 2.5f);
  geo::FovSpec fov;
  fov.center = {0.4, -2.2};
  fov.roll = 0.3;
  const auto flat_view = geo::extract_viewport(flat, fov, 7, 5);
  for (float v : flat_view.data()) ASSERT_EQ(v, 2.5f);

  const TensorF frame = smooth_frame(64);
  const auto view = geo::extract_viewport(frame, fov, 9, 9);
  const geo::ErpGrid grid(128, 64);
  const auto p = geo::latlon_to_erp_pixel(fov.center, grid);
  EXPECT_NEAR(view[4 * 9 + 4], geo::sample_bilinear_wrapped(frame.data(), 128, 64, p), 1e-6);
}

TEST(Viewport, NinetyDegreesMatchesFrontFace) {
  const TensorF frame = smooth_frame(128);
  geo::FovSpec fov;
  const auto view = geo::extract_viewport(frame, fov, 128, 128);
  const auto face = geo::cube_face(frame, geo::CubeFace::kFront, 128);
  double worst = 0.0;
  for (std::size_t i = 0; i < view.size(); ++i) {
    worst = std::max(worst, static_cast<double>(std::abs(view[i] - face[i])));
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(Viewport, EveryFaceMatchesItsViewport) {
  const TensorF frame = smooth_frame(64);
  const std::pair<geo::CubeFace, geo::LatLon> centers[] = {{geo::CubeFace::kBack, {0.0, -kPi}},
                                                           {geo::CubeFace::kLeft, {0.0, kPi / 2}},
                                                           {geo::CubeFace::kRight, {0.0, -kPi / 2}}};
  for (const auto& [face, center] : centers) {
    geo::FovSpec fov;
    fov.center = center;
    const auto view = geo::extract_viewport(frame, fov, 32, 32);
    const auto cube = geo::cube_face(frame, face, 32);
    for (std::size_t i = 0; i < view.size(); ++i) ASSERT_NEAR(view[i], cube[i], 1e-5);
  }
}

TEST(Viewport, DomainErrors) {
  const TensorF frame({8, 16});
  geo::FovSpec wide;
  wide.hfov = kPi;
  EXPECT_EQ(kind_of([&] { geo::extract_viewport(frame, wide, 4, 4); }),
            ErrorKind::kProjectionDomain);
  geo::FovSpec ok;
  EXPECT_EQ(kind_of([&] { geo::extract_viewport(frame, ok, 0, 4); }), ErrorKind::kParameter);
  geo::FovSpec bad;
  bad.vfov = 0.0;
  EXPECT_EQ(kind_of([&] { geo::extract_viewport(frame, bad, 4, 4); }), ErrorKind::kParameter);
}

TEST(Bilinear, WrapAndClamp) {
  const std::vector<float> plane = {0, 1, 2, 3, 4, 5, 6, 7};  // 2 rows x 4 cols
  EXPECT_DOUBLE_EQ(geo::sample_bilinear_wrapped(plane, 4, 2, {3.5, 0.0}), 1.5);
  EXPECT_DOUBLE_EQ(geo::sample_bilinear_wrapped(plane, 4, 2, {-0.5, 0.0}), 1.5);
  EXPECT_DOUBLE_EQ(geo::sample_bilinear_wrapped(plane, 4, 2, {1.0, -3.0}), 1.0);
  EXPECT_DOUBLE_EQ(geo::sample_bilinear_wrapped(plane, 4, 2, {1.0, 9.0}), 5.0);
  EXPECT_DOUBLE_EQ(geo::sample_bilinear_wrapped(plane, 4, 2, {1.5, 0.5}), 3.5);
}

TEST(Boundary, CornersClosedForm) {
  geo::FovSpec fov;
  const geo::ErpGrid grid(512, 256);
  const auto line = geo::project_fov_boundary(fov, grid, 9);
  ASSERT_EQ(line.points.size(), 4u * 8u);
  const double corner_lat = std::atan(1.0 / std::sqrt(2.0));
  // Edges start at their corners: top-left, top-right, bottom-right, bottom-left.
  const double lats[4] = {corner_lat, corner_lat, -corner_lat, -corner_lat};
  const double lons[4] = {kPi / 4, -kPi / 4, -kPi / 4, kPi / 4};
  for (int k = 0; k < 4; ++k) {
    const auto& p = line.points[static_cast<std::size_t>(k) * 8].latlon;
    EXPECT_NEAR(p.lat, lats[k], 1e-9);
    EXPECT_NEAR(p.lon, lons[k], 1e-9);
  }
  EXPECT_FALSE(line.crosses_seam());
}

TEST(Boundary, SamplesLieOnFrustumEdge) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> lat(-1.2, 1.2), lon(-kPi, kPi), fov_d(0.3, 2.8),
      roll(-1, 1);
  const geo::ErpGrid grid(64, 32);
  for (int trial = 0; trial < 50; ++trial) {
    geo::FovSpec fov;
    fov.center = {lat(rng), lon(rng)};
    fov.hfov = fov_d(rng);
    fov.vfov = fov_d(rng);
    fov.roll = roll(rng);
    const double tx = std::tan(fov.hfov / 2), ty = std::tan(fov.vfov / 2);
    for (const auto& s : geo::project_fov_boundary(fov, grid, 7).points) {
      const auto c = geo::frustum_coords(s.direction, fov);
      ASSERT_GT(c.forward, 0.0);
      const double edge = std::min(std::abs(std::abs(c.x) - tx), std::abs(std::abs(c.y) - ty));
      ASSERT_LE(edge, 1e-9);
      ASSERT_LE(std::abs(c.x), tx + 1e-9);
      ASSERT_LE(std::abs(c.y), ty + 1e-9);
    }
  }
}

TEST(Boundary, SeamCrossingFlagged) {
  geo::FovSpec fov;
  fov.center = {0.0, kPi - 1e-3};
  const auto line = geo::project_fov_boundary(fov, geo::ErpGrid(64, 32), 5);
  EXPECT_TRUE(line.crosses_seam());
  EXPECT_EQ(line.seam_crossings.size(), 2u);
}

TEST(Boundary, Errors) {
  const geo::ErpGrid grid(16, 8);
  geo::FovSpec sphere;
  sphere.hfov = 2 * kPi;
  sphere.vfov = kPi;
  EXPECT_EQ(kind_of([&] { geo::project_fov_boundary(sphere, grid, 4); }), ErrorKind::kNoBoundary);
  geo::FovSpec fov;
  EXPECT_EQ(kind_of([&] { geo::project_fov_boundary(fov, grid, 1); }), ErrorKind::kParameter);
  fov.hfov = 3.5;
  EXPECT_EQ(kind_of([&] { geo::project_fov_boundary(fov, grid, 4); }),
            ErrorKind::kProjectionDomain);
}

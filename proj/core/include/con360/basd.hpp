#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "con360/geometry.hpp"
#include "con360/io.hpp"
#include "con360/saliency.hpp"

// Bounding-box-aware signed distance (BASD) maps on ERP grids.
//
// The boundary is the interface between inside and outside pixels: an inside
// pixel stores +distance to the nearest outside pixel and an outside pixel
// stores -distance to the nearest inside pixel, so |value| >= 1 everywhere.
// Distances are planar in ERP pixel units with horizontal wraparound:
//   d(p, q)^2 = min(|du|, W - |du|)^2 + dv^2.
namespace con360::basd {

using geometry::ErpGrid;
using geometry::FovSpec;
using saliency::BinaryMask;

struct FovMask {
  ErpGrid grid;
  BinaryMask inside;
};

struct BasdMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> values;
};

FovMask rasterize_fov_mask(const FovSpec& fov, const ErpGrid& grid);

// Squared wrap-aware distance from every pixel to the nearest pixel whose mask
// bit equals `target`. Exact integer arithmetic; UINT64_MAX where no such
// pixel exists. Lower-envelope transform per column, then per row on the
// doubled row folded back onto W columns.
std::vector<std::uint64_t> squared_distance_to(const BinaryMask& mask, bool target);

// Throws kUndefinedBoundary for an all-inside or all-outside mask.
BasdMap signed_distance_map(const BinaryMask& mask);

enum class DistanceMetric {
  kErpPixels,
  // Great-circle angle to the nearest opposite-class boundary pixel, scaled by
  // H / pi so one unit equals one pixel row. Requires a 2:1 grid.
  kAngular,
};

BasdMap signed_angular_distance_map(const FovMask& mask);

// Throws kNoBoundary for a full-sphere FoV.
BasdMap basd_for_fov(const FovSpec& fov, const ErpGrid& grid,
                     DistanceMetric metric = DistanceMetric::kErpPixels);

// Order-preserving min-max rescale to [0, 1]; constant maps give zeros.
std::vector<float> normalize_basd(const BasdMap& map);

// 16-bit visualization: sample = round((v + M) / (2M) * 65535) with
// M = max |v|, so 0 encodes -M and 65535 encodes +M.
struct PgmPacking {
  double max_abs = 0.0;
  double offset = 0.0;  // value at sample 0
  double scale = 0.0;   // value units per sample step
};

io::GrayImageFile pack_pgm16(const BasdMap& map, PgmPacking* packing = nullptr);

}  // namespace con360::basd

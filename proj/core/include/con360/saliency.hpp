#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "con360/geometry.hpp"
#include "con360/tensor.hpp"

// Post-processing of externally predicted 360-degree saliency maps.
namespace con360::saliency {

using geometry::ErpGrid;
using geometry::FovSpec;
using geometry::LatLon;

class SaliencyFrame {
 public:
  // Throws kShape on a size mismatch, kInvalidData on negative or non-finite
  // values.
  SaliencyFrame(ErpGrid grid, std::vector<float> values);

  const ErpGrid& grid() const noexcept { return grid_; }
  std::span<const float> values() const noexcept { return values_; }
  float at(std::size_t u, std::size_t v) const { return values_[v * grid_.width() + u]; }

 private:
  ErpGrid grid_;
  std::vector<float> values_;
};

class SaliencySequence {
 public:
  // Throws kShape for an empty sequence or mismatched grids.
  SaliencySequence(std::vector<SaliencyFrame> frames, double fps);

  // From a (T, H, W) tensor.
  static SaliencySequence from_tensor(const TensorF& t, double fps);
  TensorF to_tensor() const;

  const std::vector<SaliencyFrame>& frames() const noexcept { return frames_; }
  std::size_t length() const noexcept { return frames_.size(); }
  const ErpGrid& grid() const { return frames_.front().grid(); }
  double fps() const noexcept { return fps_; }

 private:
  std::vector<SaliencyFrame> frames_;
  double fps_;
};

// (x - min) / (max - min); a constant input maps to zeros. Throws kInvalidData
// on NaN or infinity.
std::vector<float> minmax_normalize(std::span<const float> values);
SaliencyFrame normalize_minmax(const SaliencyFrame& frame);

// Binary mask on an arbitrary height x width raster (1 = set).
struct BinaryMask {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> bits;

  bool at(std::size_t r, std::size_t c) const { return bits[r * width + c] != 0; }
};

// mask = value >= tau. Throws kParameter for tau outside [0, 1] and
// kInvalidData for values outside [0, 1].
BinaryMask threshold(const SaliencyFrame& normalized, double tau);

struct Component {
  std::int32_t label = 0;
  std::size_t pixel_count = 0;
};

struct Labeling {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::int32_t> labels;  // 0 = background
  std::vector<Component> components;  // ordered by label, labels dense from 1
};

// 8-connected labeling with columns 0 and W-1 adjacent. Labels follow the
// raster order of each component's first pixel.
Labeling connected_components_wrapped(const BinaryMask& mask);

struct ErpBox {
  std::size_t u_min = 0;
  std::size_t v_min = 0;
  std::size_t u_max = 0;
  std::size_t v_max = 0;
  bool wrapped = false;  // the column span crosses the seam; u_min > u_max
};

struct SalientRegion {
  std::int32_t label = 0;
  std::size_t pixel_count = 0;
  double mass = 0.0;
  LatLon centroid;
  ErpBox erp_bbox;
};

// Saliency-weighted mean direction of a region, mapped back to lat/lon.
// Throws kDegenerateCentroid when the mean resultant length is below 1e-9
// (e.g. antipodally balanced regions), kInvalidInput for an unknown label.
LatLon region_centroid_spherical(const Labeling& labels,
                                 const SaliencyFrame& frame, std::int32_t label);

// Unweighted variant used when saliency weighting is disabled.
LatLon region_centroid_uniform(const Labeling& labels, const ErpGrid& grid,
                               std::int32_t label);

struct RegionParams {
  double tau = 0.5;
  double min_region_fraction = 1e-4;  // of total pixels
  bool weighted_centroid = true;
};

// normalize -> threshold -> label -> filter -> centroid/bbox. Regions with
// fewer than ceil(min_region_fraction * pixels) pixels or zero mass are dropped.
std::vector<SalientRegion> extract_regions(const SaliencyFrame& frame,
                                           const RegionParams& params);

// Top-k regions by mass (ties: lower label first) as FoVs with roll 0.
// Throws kParameter when top_k == 0.
std::vector<FovSpec> regions_to_fovs(std::vector<SalientRegion> regions,
                                     double fov_w, double fov_h,
                                     std::size_t top_k);

// Per-pixel mean over frames.
SaliencyFrame temporal_mean(const SaliencySequence& seq);

double great_circle_distance(const LatLon& a, const LatLon& b);

// Index of the region whose centroid is nearest `anchor`, if within `gate`
// radians of great-circle distance.
std::optional<std::size_t> match_region(const LatLon& anchor,
                                        const std::vector<SalientRegion>& regions,
                                        double gate);

enum class ViewpointMode { kSegment, kPerFrame };

struct ViewpointParams {
  RegionParams regions;
  double fov_w = geometry::kPi / 2;
  double fov_h = geometry::kPi / 2;
  ViewpointMode mode = ViewpointMode::kSegment;
  double track_gate = 10.0 * geometry::kPi / 180.0;
};

// One FoV per frame. Segment mode derives a single FoV from the temporal mean
// and repeats it; per-frame mode starts from the top region of the first
// frame that has one and follows it with nearest-centroid matching, holding
// the last viewpoint when no region falls inside the gate. Returns nullopt
// when no frame yields a region.
std::optional<std::vector<FovSpec>> select_viewpoints(
    const SaliencySequence& seq, const ViewpointParams& params);

}  // namespace con360::saliency

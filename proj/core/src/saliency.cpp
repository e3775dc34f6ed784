#include "con360/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "con360/parallel.hpp"

namespace con360::saliency {
namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void join(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent_[a] = b;
  }

 private:
  std::vector<std::size_t> parent_;
};

struct Resultant {
  double x = 0, y = 0, z = 0, weight = 0;
};

template <typename WeightFn>
Resultant region_resultant(const Labeling& labels, const ErpGrid& grid,
                           std::int32_t label, WeightFn&& weight) {
  if (label < 1 || static_cast<std::size_t>(label) > labels.components.size()) {
    raise(ErrorKind::kInvalidInput, "no region with label " + std::to_string(label));
  }
  Resultant r;
  for (std::size_t v = 0; v < labels.height; ++v) {
    for (std::size_t u = 0; u < labels.width; ++u) {
      if (labels.labels[v * labels.width + u] != label) continue;
      const double w = weight(u, v);
      const auto d = geometry::latlon_to_direction(geometry::erp_pixel_to_latlon(u, v, grid));
      r.x += w * d.x;
      r.y += w * d.y;
      r.z += w * d.z;
      r.weight += w;
    }
  }
  return r;
}

LatLon resultant_to_latlon(const Resultant& r) {
  if (!(r.weight > 0.0)) {
    raise(ErrorKind::kDegenerateCentroid, "region has zero saliency mass");
  }
  const double mean_length = std::sqrt(r.x * r.x + r.y * r.y + r.z * r.z) / r.weight;
  if (mean_length < 1e-9) {
    raise(ErrorKind::kDegenerateCentroid,
          "region directions cancel out; centroid undefined");
  }
  return geometry::direction_to_latlon({r.x, r.y, r.z});
}

// Smallest circular column interval covering every occupied column.
void fill_column_span(const std::vector<bool>& occupied, ErpBox& box) {
  const std::size_t w = occupied.size();
  if (std::all_of(occupied.begin(), occupied.end(), [](bool b) { return b; })) {
    box.u_min = 0;
    box.u_max = w - 1;
    box.wrapped = false;
    return;
  }
  // Longest circular run of empty columns, scanning from the first occupied one.
  std::size_t start = 0;
  while (!occupied[start]) ++start;
  std::size_t best_len = 0, best_begin = 0, run = 0, run_begin = 0;
  for (std::size_t k = 1; k <= w; ++k) {
    const std::size_t c = (start + k) % w;
    if (!occupied[c]) {
      if (run == 0) run_begin = c;
      ++run;
      if (run > best_len) {
        best_len = run;
        best_begin = run_begin;
      }
    } else {
      run = 0;
    }
  }
  box.u_min = (best_begin + best_len) % w;
  box.u_max = (best_begin + w - 1) % w;
  box.wrapped = box.u_min > box.u_max;
}

}  // namespace

SaliencyFrame::SaliencyFrame(ErpGrid grid, std::vector<float> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.pixels()) {
    raise(ErrorKind::kShape, "saliency frame has " + std::to_string(values_.size()) +
                                 " values for a " + std::to_string(grid_.width()) +
                                 "x" + std::to_string(grid_.height()) + " grid");
  }
  for (float v : values_) {
    if (!std::isfinite(v) || v < 0.0f) {
      raise(ErrorKind::kInvalidData, "saliency values must be finite and >= 0");
    }
  }
}

SaliencySequence::SaliencySequence(std::vector<SaliencyFrame> frames, double fps)
    : frames_(std::move(frames)), fps_(fps) {
  if (frames_.empty()) raise(ErrorKind::kShape, "saliency sequence is empty");
  for (const auto& f : frames_) {
    if (!(f.grid() == frames_.front().grid())) {
      raise(ErrorKind::kShape, "saliency frames do not share one grid");
    }
  }
  if (!(fps_ > 0.0)) raise(ErrorKind::kParameter, "fps must be positive");
}

SaliencySequence SaliencySequence::from_tensor(const TensorF& t, double fps) {
  if (t.rank() != 3) {
    raise(ErrorKind::kShape, "saliency tensor must be (T, H, W), got " +
                                 shape_to_string(t.shape()));
  }
  const ErpGrid grid(t.dim(2), t.dim(1));
  std::vector<SaliencyFrame> frames;
  frames.reserve(t.dim(0));
  for (std::size_t i = 0; i < t.dim(0); ++i) {
    const auto slab = t.slab(i);
    frames.emplace_back(grid, std::vector<float>(slab.begin(), slab.end()));
  }
  return SaliencySequence(std::move(frames), fps);
}

TensorF SaliencySequence::to_tensor() const {
  const auto& g = grid();
  TensorF t({length(), g.height(), g.width()});
  for (std::size_t i = 0; i < length(); ++i) {
    std::ranges::copy(frames_[i].values(), t.slab(i).begin());
  }
  return t;
}

std::vector<float> minmax_normalize(std::span<const float> values) {
  if (values.empty()) return {};
  float lo = values[0], hi = values[0];
  for (float v : values) {
    if (!std::isfinite(v)) raise(ErrorKind::kInvalidData, "map contains NaN or infinity");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  std::vector<float> out(values.size(), 0.0f);
  if (hi == lo) return out;
  const double range = static_cast<double>(hi) - static_cast<double>(lo);
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = static_cast<float>((static_cast<double>(values[i]) - lo) / range);
  }
  return out;
}

SaliencyFrame normalize_minmax(const SaliencyFrame& frame) {
  return SaliencyFrame(frame.grid(), minmax_normalize(frame.values()));
}

BinaryMask threshold(const SaliencyFrame& normalized, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    raise(ErrorKind::kParameter, "threshold tau must lie in [0, 1]");
  }
  BinaryMask mask{normalized.grid().height(), normalized.grid().width(), {}};
  mask.bits.reserve(normalized.grid().pixels());
  for (float v : normalized.values()) {
    if (v > 1.0f) raise(ErrorKind::kInvalidData, "threshold input must be normalized to [0, 1]");
    mask.bits.push_back(static_cast<double>(v) >= tau ? 1 : 0);
  }
  return mask;
}

Labeling connected_components_wrapped(const BinaryMask& mask) {
  const std::size_t h = mask.height;
  const std::size_t w = mask.width;
  Labeling out{h, w, std::vector<std::int32_t>(h * w, 0), {}};
  if (h == 0 || w == 0) return out;
  DisjointSets sets(h * w);
  auto idx = [w](std::size_t r, std::size_t c) { return r * w + c; };
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      if (!mask.at(r, c)) continue;
      const std::size_t left = (c + w - 1) % w;
      const std::size_t right = (c + 1) % w;
      if (mask.at(r, left)) sets.join(idx(r, c), idx(r, left));
      if (r == 0) continue;
      for (std::size_t cc : {left, c, right}) {
        if (mask.at(r - 1, cc)) sets.join(idx(r, c), idx(r - 1, cc));
      }
    }
  }
  std::vector<std::int32_t> root_label(h * w, 0);
  for (std::size_t i = 0; i < h * w; ++i) {
    if (!mask.bits[i]) continue;
    const std::size_t root = sets.find(i);
    if (root_label[root] == 0) {
      out.components.push_back({static_cast<std::int32_t>(out.components.size() + 1), 0});
      root_label[root] = out.components.back().label;
    }
    out.labels[i] = root_label[root];
    ++out.components[static_cast<std::size_t>(root_label[root] - 1)].pixel_count;
  }
  return out;
}

LatLon region_centroid_spherical(const Labeling& labels, const SaliencyFrame& frame,
                                 std::int32_t label) {
  return resultant_to_latlon(region_resultant(
      labels, frame.grid(), label,
      [&](std::size_t u, std::size_t v) { return static_cast<double>(frame.at(u, v)); }));
}

LatLon region_centroid_uniform(const Labeling& labels, const ErpGrid& grid,
                               std::int32_t label) {
  return resultant_to_latlon(
      region_resultant(labels, grid, label, [](std::size_t, std::size_t) { return 1.0; }));
}

std::vector<SalientRegion> extract_regions(const SaliencyFrame& frame,
                                           const RegionParams& params) {
  if (!(params.min_region_fraction >= 0.0 && params.min_region_fraction <= 1.0)) {
    raise(ErrorKind::kParameter, "min_region_fraction must lie in [0, 1]");
  }
  const SaliencyFrame normalized = normalize_minmax(frame);
  const Labeling labels = connected_components_wrapped(threshold(normalized, params.tau));
  const ErpGrid& grid = frame.grid();
  const auto min_pixels = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::ceil(params.min_region_fraction * static_cast<double>(grid.pixels()))));

  const std::size_t n = labels.components.size();
  std::vector<double> mass(n, 0.0);
  std::vector<ErpBox> boxes(n);
  std::vector<std::vector<bool>> columns(n, std::vector<bool>(grid.width(), false));
  for (auto& b : boxes) {
    b.v_min = grid.height();
    b.v_max = 0;
  }
  for (std::size_t v = 0; v < grid.height(); ++v) {
    for (std::size_t u = 0; u < grid.width(); ++u) {
      const std::int32_t l = labels.labels[v * grid.width() + u];
      if (l == 0) continue;
      const auto k = static_cast<std::size_t>(l - 1);
      mass[k] += normalized.at(u, v);
      boxes[k].v_min = std::min(boxes[k].v_min, v);
      boxes[k].v_max = std::max(boxes[k].v_max, v);
      columns[k][u] = true;
    }
  }

  std::vector<SalientRegion> regions;
  for (std::size_t k = 0; k < n; ++k) {
    const Component& comp = labels.components[k];
    if (comp.pixel_count < min_pixels || !(mass[k] > 0.0)) continue;
    SalientRegion region;
    region.label = comp.label;
    region.pixel_count = comp.pixel_count;
    region.mass = mass[k];
    region.erp_bbox = boxes[k];
    fill_column_span(columns[k], region.erp_bbox);
    region.centroid = params.weighted_centroid
                          ? region_centroid_spherical(labels, normalized, comp.label)
                          : region_centroid_uniform(labels, grid, comp.label);
    regions.push_back(region);
  }
  return regions;
}

std::vector<FovSpec> regions_to_fovs(std::vector<SalientRegion> regions, double fov_w,
                                     double fov_h, std::size_t top_k) {
  if (top_k == 0) raise(ErrorKind::kParameter, "top_k must be >= 1");
  std::ranges::stable_sort(regions, [](const SalientRegion& a, const SalientRegion& b) {
    if (a.mass != b.mass) return a.mass > b.mass;
    return a.label < b.label;
  });
  std::vector<FovSpec> fovs;
  for (std::size_t i = 0; i < std::min(top_k, regions.size()); ++i) {
    FovSpec fov;
    fov.center = regions[i].centroid;
    fov.hfov = fov_w;
    fov.vfov = fov_h;
    fov.roll = 0.0;
    geometry::validate_fov(fov);
    fovs.push_back(fov);
  }
  return fovs;
}

SaliencyFrame temporal_mean(const SaliencySequence& seq) {
  const ErpGrid& grid = seq.grid();
  std::vector<double> acc(grid.pixels(), 0.0);
  for (const auto& f : seq.frames()) {
    const auto values = f.values();
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += values[i];
  }
  std::vector<float> mean(acc.size());
  const double t = static_cast<double>(seq.length());
  for (std::size_t i = 0; i < acc.size(); ++i) mean[i] = static_cast<float>(acc[i] / t);
  return SaliencyFrame(grid, std::move(mean));
}

double great_circle_distance(const LatLon& a, const LatLon& b) {
  const auto da = geometry::latlon_to_direction(a);
  const auto db = geometry::latlon_to_direction(b);
  const double cross_x = da.y * db.z - da.z * db.y;
  const double cross_y = da.z * db.x - da.x * db.z;
  const double cross_z = da.x * db.y - da.y * db.x;
  return std::atan2(std::sqrt(cross_x * cross_x + cross_y * cross_y + cross_z * cross_z),
                    da.dot(db));
}

std::optional<std::size_t> match_region(const LatLon& anchor,
                                        const std::vector<SalientRegion>& regions,
                                        double gate) {
  std::optional<std::size_t> best;
  double best_distance = gate;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const double d = great_circle_distance(anchor, regions[i].centroid);
    if (d <= best_distance && (!best || d < best_distance)) {
      best = i;
      best_distance = d;
    }
  }
  return best;
}

std::optional<std::vector<FovSpec>> select_viewpoints(const SaliencySequence& seq,
                                                      const ViewpointParams& params) {
  const std::size_t t = seq.length();
  if (params.mode == ViewpointMode::kSegment) {
    auto fovs = regions_to_fovs(extract_regions(temporal_mean(seq), params.regions),
                                params.fov_w, params.fov_h, 1);
    if (fovs.empty()) return std::nullopt;
    return std::vector<FovSpec>(t, fovs.front());
  }

  std::vector<std::vector<SalientRegion>> per_frame(t);
  parallel_for(t, [&](std::size_t i) {
    per_frame[i] = extract_regions(seq.frames()[i], params.regions);
  });
  std::size_t first = 0;
  while (first < t && per_frame[first].empty()) ++first;
  if (first == t) return std::nullopt;

  FovSpec current =
      regions_to_fovs(per_frame[first], params.fov_w, params.fov_h, 1).front();
  std::vector<FovSpec> out(t, current);
  for (std::size_t i = first + 1; i < t; ++i) {
    if (auto hit = match_region(current.center, per_frame[i], params.track_gate)) {
      current.center = per_frame[i][*hit].centroid;
    }
    out[i] = current;
  }
  return out;
}

}  // namespace con360::saliency

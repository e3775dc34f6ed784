#include "con360/basd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "con360/parallel.hpp"

namespace con360::basd {
namespace {

constexpr std::int64_t kAbsent = -1;

// Parabola intersection abscissa kept as an exact fraction (den > 0).
struct Frac {
  std::int64_t num = 0;
  std::int64_t den = 1;
  int inf = 0;  // -1: -infinity, +1: +infinity
};

bool frac_le(const Frac& a, const Frac& b) {
  if (a.inf != 0 || b.inf != 0) return a.inf <= b.inf;
  return a.num * b.den <= b.num * a.den;
}

bool frac_lt_int(const Frac& a, std::int64_t x) {
  if (a.inf != 0) return a.inf < 0;
  return a.num < x * a.den;
}

// Exact 1-D squared distance transform of f (kAbsent = no feature) over
// positions 0..n-1: out[x] = min_q (x - q)^2 + f[q].
void lower_envelope_1d(const std::vector<std::int64_t>& f, std::vector<std::int64_t>& out,
                       std::vector<std::int64_t>& v, std::vector<Frac>& z) {
  const auto n = static_cast<std::int64_t>(f.size());
  out.assign(f.size(), kAbsent);
  v.clear();
  z.clear();
  for (std::int64_t q = 0; q < n; ++q) {
    if (f[q] == kAbsent) continue;
    if (v.empty()) {
      v.push_back(q);
      z.push_back({0, 1, -1});
      z.push_back({0, 1, +1});
      continue;
    }
    Frac s;
    while (true) {
      const std::int64_t p = v.back();
      s = {(f[q] + q * q) - (f[p] + p * p), 2 * (q - p), 0};
      if (v.size() > 1 && frac_le(s, z[v.size() - 1])) {
        v.pop_back();
        z.pop_back();
        continue;
      }
      break;
    }
    z.back() = s;
    v.push_back(q);
    z.push_back({0, 1, +1});
  }
  if (v.empty()) return;
  std::size_t k = 0;
  for (std::int64_t x = 0; x < n; ++x) {
    while (frac_lt_int(z[k + 1], x)) ++k;
    const std::int64_t d = x - v[k];
    out[x] = d * d + f[v[k]];
  }
}

bool has_both_classes(const BinaryMask& mask) {
  const auto inside = std::count_if(mask.bits.begin(), mask.bits.end(),
                                    [](std::uint8_t b) { return b != 0; });
  return inside > 0 && static_cast<std::size_t>(inside) < mask.bits.size();
}

}  // namespace

FovMask rasterize_fov_mask(const FovSpec& fov, const ErpGrid& grid) {
  geometry::validate_fov(fov);
  FovMask mask{grid, {grid.height(), grid.width(), std::vector<std::uint8_t>(grid.pixels())}};
  parallel_for(grid.height(), [&](std::size_t v) {
    for (std::size_t u = 0; u < grid.width(); ++u) {
      const auto d = geometry::latlon_to_direction(geometry::erp_pixel_to_latlon(u, v, grid));
      mask.inside.bits[v * grid.width() + u] = geometry::is_inside_fov(d, fov) ? 1 : 0;
    }
  });
  return mask;
}

std::vector<std::uint64_t> squared_distance_to(const BinaryMask& mask, bool target) {
  const std::size_t h = mask.height;
  const std::size_t w = mask.width;
  if (mask.bits.size() != h * w) raise(ErrorKind::kShape, "mask size does not match its dims");
  std::vector<std::int64_t> column_sq(h * w, kAbsent);

  // Vertical pass: squared distance to the nearest target pixel in the column.
  parallel_for(w, [&](std::size_t c) {
    std::int64_t last = kAbsent;
    for (std::size_t r = 0; r < h; ++r) {
      if (mask.at(r, c) == target) last = static_cast<std::int64_t>(r);
      if (last != kAbsent) {
        const std::int64_t d = static_cast<std::int64_t>(r) - last;
        column_sq[r * w + c] = d * d;
      }
    }
    last = kAbsent;
    for (std::size_t r = h; r-- > 0;) {
      if (mask.at(r, c) == target) last = static_cast<std::int64_t>(r);
      if (last != kAbsent) {
        const std::int64_t d = last - static_cast<std::int64_t>(r);
        auto& cell = column_sq[r * w + c];
        if (cell == kAbsent || d * d < cell) cell = d * d;
      }
    }
  });

  // Horizontal pass on the doubled row; folding columns c and c + W yields
  // every wrapped offset min(|du|, W - |du|).
  std::vector<std::uint64_t> out(h * w, std::numeric_limits<std::uint64_t>::max());
  parallel_for(h, [&](std::size_t r) {
    std::vector<std::int64_t> f(2 * w), d, v;
    std::vector<Frac> z;
    for (std::size_t x = 0; x < 2 * w; ++x) f[x] = column_sq[r * w + x % w];
    lower_envelope_1d(f, d, v, z);
    for (std::size_t c = 0; c < w; ++c) {
      const std::int64_t a = d[c];
      const std::int64_t b = d[c + w];
      std::int64_t best = a;
      if (best == kAbsent || (b != kAbsent && b < best)) best = b;
      if (best != kAbsent) out[r * w + c] = static_cast<std::uint64_t>(best);
    }
  });
  return out;
}

BasdMap signed_distance_map(const BinaryMask& mask) {
  if (!has_both_classes(mask)) {
    raise(ErrorKind::kUndefinedBoundary,
          "BASD needs at least one inside and one outside pixel");
  }
  const auto to_outside = squared_distance_to(mask, false);
  const auto to_inside = squared_distance_to(mask, true);
  BasdMap map{mask.height, mask.width, std::vector<float>(mask.bits.size())};
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    map.values[i] = mask.bits[i]
                        ? static_cast<float>(std::sqrt(static_cast<double>(to_outside[i])))
                        : -static_cast<float>(std::sqrt(static_cast<double>(to_inside[i])));
  }
  return map;
}

BasdMap signed_angular_distance_map(const FovMask& mask) {
  const BinaryMask& m = mask.inside;
  if (!has_both_classes(m)) {
    raise(ErrorKind::kUndefinedBoundary,
          "BASD needs at least one inside and one outside pixel");
  }
  const std::size_t h = m.height;
  const std::size_t w = m.width;
  std::vector<geometry::Direction> dirs(h * w);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      dirs[r * w + c] =
          geometry::latlon_to_direction(geometry::erp_pixel_to_latlon(c, r, mask.grid));
    }
  }
  // Boundary pixels: those with an 8-neighbour of the other class.
  std::vector<std::size_t> inside_edge, outside_edge;
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      bool edge = false;
      for (int dr = -1; dr <= 1 && !edge; ++dr) {
        const auto rr = static_cast<std::ptrdiff_t>(r) + dr;
        if (rr < 0 || rr >= static_cast<std::ptrdiff_t>(h)) continue;
        for (int dc = -1; dc <= 1; ++dc) {
          const std::size_t cc = (c + w + static_cast<std::size_t>(dc + 1) - 1) % w;
          if (m.at(static_cast<std::size_t>(rr), cc) != m.at(r, c)) {
            edge = true;
            break;
          }
        }
      }
      if (edge) (m.at(r, c) ? inside_edge : outside_edge).push_back(r * w + c);
    }
  }
  const double scale = static_cast<double>(h) / geometry::kPi;
  BasdMap map{h, w, std::vector<float>(h * w)};
  parallel_for(h, [&](std::size_t r) {
    for (std::size_t c = 0; c < w; ++c) {
      const std::size_t i = r * w + c;
      const bool in = m.bits[i] != 0;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j : in ? outside_edge : inside_edge) {
        const auto& a = dirs[i];
        const auto& b = dirs[j];
        const double cx = a.y * b.z - a.z * b.y;
        const double cy = a.z * b.x - a.x * b.z;
        const double cz = a.x * b.y - a.y * b.x;
        best = std::min(best, std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), a.dot(b)));
      }
      map.values[i] = static_cast<float>((in ? 1.0 : -1.0) * best * scale);
    }
  });
  return map;
}

BasdMap basd_for_fov(const FovSpec& fov, const ErpGrid& grid, DistanceMetric metric) {
  if (fov.is_full_sphere()) {
    raise(ErrorKind::kNoBoundary, "a full-sphere FoV has no boundary");
  }
  const FovMask mask = rasterize_fov_mask(fov, grid);
  if (metric == DistanceMetric::kAngular) return signed_angular_distance_map(mask);
  return signed_distance_map(mask.inside);
}

std::vector<float> normalize_basd(const BasdMap& map) {
  return saliency::minmax_normalize(map.values);
}

io::GrayImageFile pack_pgm16(const BasdMap& map, PgmPacking* packing) {
  double max_abs = 0.0;
  for (float v : map.values) max_abs = std::max(max_abs, std::abs(static_cast<double>(v)));
  io::GrayImageFile img{map.width, map.height, 16, std::vector<std::uint16_t>(map.values.size())};
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    const double t = max_abs > 0.0 ? (map.values[i] + max_abs) / (2.0 * max_abs) : 0.5;
    img.samples[i] = static_cast<std::uint16_t>(std::lround(std::clamp(t, 0.0, 1.0) * 65535.0));
  }
  if (packing) *packing = {max_abs, -max_abs, max_abs > 0.0 ? 2.0 * max_abs / 65535.0 : 0.0};
  return img;
}

}  // namespace con360::basd

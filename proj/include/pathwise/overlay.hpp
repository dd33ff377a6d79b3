#pragma once

// Polygon boolean operations by planar overlay.
//
// Input rings are snapped to an integer lattice (2^20 units per cell, i.e.
// a snapping tolerance below 1e-6 cell units) and the arrangement of all
// their edges is snap-rounded: every proper crossing becomes a hot pixel and
// every edge is re-routed through the centers of the hot pixels it touches.
// Faces of the resulting planar graph carry one winding number per operand,
// and the boundary of any selected set of faces is emitted as closed rings.
//
// Rings always close: the output is the boundary of a set of faces of a
// half-edge structure, so in- and out-degrees balance at every vertex even
// if rounding left the embedding imperfect.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <unordered_map>
#include <vector>

#include "pathwise/polygon.hpp"

namespace pathwise::overlay {

using i64 = std::int64_t;
using i128 = __int128;

inline constexpr double kSnapScale = 1048576.0;  // lattice units per cell

struct IPoint {
  i64 x = 0;
  i64 y = 0;
  friend auto operator<=>(const IPoint&, const IPoint&) = default;
};

inline IPoint snap(Point2 p) { return {std::llround(p.x * kSnapScale), std::llround(p.y * kSnapScale)}; }
inline Point2 unsnap(IPoint p) { return {static_cast<double>(p.x) / kSnapScale, static_cast<double>(p.y) / kSnapScale}; }

inline i128 cross(IPoint o, IPoint a, IPoint b) {
  return static_cast<i128>(a.x - o.x) * (b.y - o.y) - static_cast<i128>(a.y - o.y) * (b.x - o.x);
}

inline int sgn(i128 v) { return (v > 0) - (v < 0); }

/// floor(n / d) for d > 0.
inline i128 floor_div(i128 n, i128 d) {
  i128 q = n / d;
  if ((n % d != 0) && (n < 0)) --q;
  return q;
}

/// Nearest integer to n / d, halves rounded up; d > 0.
inline i128 round_div(i128 n, i128 d) { return floor_div(2 * n + d, 2 * d); }

struct Stats {
  std::size_t segments = 0;
  std::size_t crossings = 0;
  std::size_t hot_pixels = 0;
  std::size_t edges = 0;
  std::size_t faces = 0;
  std::size_t components = 0;
};

class Overlay {
 public:
  explicit Overlay(int operands = 1) : operands_(operands) {
    if (operands < 1) throw Error("overlay: at least one operand");
  }

  /// Adds a ring (closed or open) contributing +1 winding to `operand` on
  /// its left, i.e. counter-clockwise rings enclose positive area.
  void add_ring(std::span<const Point2> ring, int operand) {
    if (operand < 0 || operand >= operands_) throw Error("overlay: operand out of range");
    std::vector<IPoint> pts;
    pts.reserve(ring.size());
    for (const Point2& p : ring) {
      const IPoint q = snap(p);
      if (pts.empty() || !(pts.back() == q)) pts.push_back(q);
    }
    while (pts.size() > 1 && pts.back() == pts.front()) pts.pop_back();
    if (pts.size() < 3) return;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      segments_.push_back(Segment{pts[i], pts[(i + 1) % pts.size()], operand});
    }
    built_ = false;
  }

  /// Adds a polygon with outers oriented counter-clockwise and holes clockwise.
  void add_polygon(const VisPolygon& poly, int operand) {
    for (const Ring& r : poly.outers) add_oriented(r, operand, true);
    for (const Ring& r : poly.holes) add_oriented(r, operand, false);
  }

  /// Boundary of the faces whose winding vector satisfies `select`. The
  /// predicate receives a pointer to `operands` winding numbers. Rings with
  /// positive area are returned as outers, negative as holes.
  template <typename Select>
  VisPolygon extract(Select&& select) {
    build();
    std::vector<char> selected(face_start_.size());
    for (std::size_t f = 0; f < face_start_.size(); ++f)
      selected[f] = select(&face_winding_[f * static_cast<std::size_t>(operands_)]) ? 1 : 0;

    const std::size_t nh = half_dest_.size();
    auto is_boundary = [&](std::size_t h) { return selected[face_of_[h]] && !selected[face_of_[h ^ 1]]; };
    std::vector<char> used(nh, 0);
    VisPolygon out;
    std::vector<IPoint> ring;
    for (std::size_t start = 0; start < nh; ++start) {
      if (used[start] || !is_boundary(start)) continue;
      ring.clear();
      std::size_t h = start;
      do {
        used[h] = 1;
        ring.push_back(vertices_[half_origin(h)]);
        // rotate clockwise around the head vertex until the next boundary edge
        const std::size_t v = half_dest_[h];
        const std::size_t deg = out_offset_[v + 1] - out_offset_[v];
        std::size_t pos = half_pos_[h ^ 1];
        std::size_t next = h;
        for (std::size_t k = 0; k < deg; ++k) {
          pos = (pos + deg - 1) % deg;
          const std::size_t cand = out_half_[out_offset_[v] + pos];
          if (is_boundary(cand)) {
            next = cand;
            break;
          }
        }
        h = next;
      } while (h != start && !used[h]);
      emit_ring(ring, out);
    }
    return out;
  }

  [[nodiscard]] const Stats& stats() const noexcept { return stats_; }

 private:
  struct Segment {
    IPoint a;
    IPoint b;
    int operand;
  };

  struct BucketGrid {
    i64 min_x = 0, min_y = 0, size = 1;
    i64 nx = 1, ny = 1;
    std::vector<std::uint32_t> offset;
    std::vector<std::uint32_t> items;

    [[nodiscard]] i64 col(i128 x) const { return static_cast<i64>(floor_div(x - min_x, size)); }
    [[nodiscard]] i64 row(i128 y) const { return static_cast<i64>(floor_div(y - min_y, size)); }
    [[nodiscard]] std::size_t id(i64 c, i64 r) const { return static_cast<std::size_t>(r * nx + c); }
  };

  void add_oriented(const Ring& r, int operand, bool ccw) {
    const double a = signed_area2(r);
    if (a == 0.0) return;
    if ((a > 0.0) == ccw) {
      add_ring(r, operand);
    } else {
      Ring rev(r.rbegin(), r.rend());
      add_ring(rev, operand);
    }
  }

  // Buckets a segment covers, conservatively padded by two lattice units.
  template <typename F>
  static void for_each_bucket(const BucketGrid& g, IPoint a, IPoint b, F&& f) {
    if (a.x > b.x) std::swap(a, b);
    const i64 c0 = std::max<i64>(0, g.col(a.x - 2));
    const i64 c1 = std::min<i64>(g.nx - 1, g.col(b.x + 2));
    for (i64 c = c0; c <= c1; ++c) {
      const i64 xl = std::max<i64>(a.x, g.min_x + c * g.size);
      const i64 xr = std::min<i64>(b.x, g.min_x + (c + 1) * g.size);
      double ylo, yhi;
      if (a.x == b.x) {
        ylo = static_cast<double>(std::min(a.y, b.y));
        yhi = static_cast<double>(std::max(a.y, b.y));
      } else {
        const double slope = static_cast<double>(b.y - a.y) / static_cast<double>(b.x - a.x);
        const double y0 = static_cast<double>(a.y) + static_cast<double>(std::max(xl, a.x) - a.x) * slope;
        const double y1 = static_cast<double>(a.y) + static_cast<double>(std::min(xr, b.x) - a.x) * slope;
        ylo = std::min(y0, y1);
        yhi = std::max(y0, y1);
        ylo = std::max(ylo, static_cast<double>(std::min(a.y, b.y)));
        yhi = std::min(yhi, static_cast<double>(std::max(a.y, b.y)));
      }
      const i64 r0 = std::max<i64>(0, g.row(static_cast<i64>(std::floor(ylo)) - 2));
      const i64 r1 = std::min<i64>(g.ny - 1, g.row(static_cast<i64>(std::ceil(yhi)) + 2));
      for (i64 r = r0; r <= r1; ++r) f(g.id(c, r));
    }
  }

  template <typename Cover>
  static void fill_buckets(BucketGrid& g, std::size_t n, Cover&& cover) {
    g.offset.assign(static_cast<std::size_t>(g.nx * g.ny) + 1, 0);
    for (std::size_t i = 0; i < n; ++i) cover(i, [&](std::size_t b) { ++g.offset[b + 1]; });
    for (std::size_t b = 0; b + 1 < g.offset.size(); ++b) g.offset[b + 1] += g.offset[b];
    g.items.resize(g.offset.back());
    std::vector<std::uint32_t> cursor(g.offset.begin(), g.offset.end() - 1);
    for (std::size_t i = 0; i < n; ++i)
      cover(i, [&](std::size_t b) { g.items[cursor[b]++] = static_cast<std::uint32_t>(i); });
  }

  static bool boxes_overlap(const Segment& s, const Segment& t) {
    return std::max(std::min(s.a.x, s.b.x), std::min(t.a.x, t.b.x)) <=
               std::min(std::max(s.a.x, s.b.x), std::max(t.a.x, t.b.x)) &&
           std::max(std::min(s.a.y, s.b.y), std::min(t.a.y, t.b.y)) <=
               std::min(std::max(s.a.y, s.b.y), std::max(t.a.y, t.b.y));
  }

  // Closed pixel square of half-size 1/2 around h against segment a-b, in
  // doubled coordinates so every quantity is an integer.
  static bool touches_pixel(IPoint a, IPoint b, IPoint h) {
    const i64 ax = 2 * a.x, ay = 2 * a.y, bx = 2 * b.x, by = 2 * b.y;
    const i64 x0 = 2 * h.x - 1, x1 = 2 * h.x + 1, y0 = 2 * h.y - 1, y1 = 2 * h.y + 1;
    if (std::max(std::min(ax, bx), x0) > std::min(std::max(ax, bx), x1)) return false;
    if (std::max(std::min(ay, by), y0) > std::min(std::max(ay, by), y1)) return false;
    const i128 dx = bx - ax, dy = by - ay;
    int pos = 0, neg = 0;
    for (const auto& [cx, cy] : {std::pair{x0, y0}, std::pair{x1, y0}, std::pair{x0, y1}, std::pair{x1, y1}}) {
      const i128 s = dx * (cy - ay) - dy * (cx - ax);
      pos += s > 0;
      neg += s < 0;
    }
    return !(pos == 4 || neg == 4);
  }

  void build() {
    if (built_) return;
    built_ = true;
    stats_ = Stats{};
    stats_.segments = segments_.size();
    vertices_.clear();
    if (segments_.empty()) {
      reset_graph();
      return;
    }

    // Bucket grid over the padded bounding box.
    i64 minx = segments_[0].a.x, maxx = minx, miny = segments_[0].a.y, maxy = miny;
    for (const Segment& s : segments_) {
      for (const IPoint& p : {s.a, s.b}) {
        minx = std::min(minx, p.x);
        maxx = std::max(maxx, p.x);
        miny = std::min(miny, p.y);
        maxy = std::max(maxy, p.y);
      }
    }
    BucketGrid grid;
    grid.min_x = minx - 4;
    grid.min_y = miny - 4;
    grid.size = 2 * static_cast<i64>(kSnapScale);
    const i64 span_x = maxx - minx + 8;
    const i64 span_y = maxy - miny + 8;
    auto dims = [&] {
      grid.nx = span_x / grid.size + 1;
      grid.ny = span_y / grid.size + 1;
    };
    dims();
    const i64 budget = std::max<i64>(64, static_cast<i64>(segments_.size()) * 2);
    while (grid.nx * grid.ny > budget && grid.size < (i64{1} << 40)) {
      grid.size *= 2;
      dims();
    }

    fill_buckets(grid, segments_.size(), [&](std::size_t i, auto&& put) {
      for_each_bucket(grid, segments_[i].a, segments_[i].b, put);
    });

    // Proper crossings become hot pixels; each is reported once, from the
    // bucket holding the exact intersection point.
    std::vector<IPoint> hot;
    hot.reserve(segments_.size() * 2);
    for (const Segment& s : segments_) {
      hot.push_back(s.a);
    }
    for (std::size_t b = 0; b + 1 < grid.offset.size(); ++b) {
      const std::uint32_t lo = grid.offset[b], hi = grid.offset[b + 1];
      const i64 bc = static_cast<i64>(b) % grid.nx;
      const i64 br = static_cast<i64>(b) / grid.nx;
      for (std::uint32_t i = lo; i < hi; ++i) {
        const Segment& s = segments_[grid.items[i]];
        for (std::uint32_t j = i + 1; j < hi; ++j) {
          const Segment& t = segments_[grid.items[j]];
          if (!boxes_overlap(s, t)) continue;
          const int o1 = sgn(cross(s.a, s.b, t.a));
          const int o2 = sgn(cross(s.a, s.b, t.b));
          if (o1 == 0 || o2 == 0 || o1 == o2) continue;
          const int o3 = sgn(cross(t.a, t.b, s.a));
          const int o4 = sgn(cross(t.a, t.b, s.b));
          if (o3 == 0 || o4 == 0 || o3 == o4) continue;
          // s.a + (s.b - s.a) * num / den
          i128 num = static_cast<i128>(t.a.x - s.a.x) * (t.b.y - t.a.y) - static_cast<i128>(t.a.y - s.a.y) * (t.b.x - t.a.x);
          i128 den = static_cast<i128>(s.b.x - s.a.x) * (t.b.y - t.a.y) - static_cast<i128>(s.b.y - s.a.y) * (t.b.x - t.a.x);
          if (den < 0) {
            num = -num;
            den = -den;
          }
          const i128 xn = static_cast<i128>(s.a.x) * den + num * (s.b.x - s.a.x);
          const i128 yn = static_cast<i128>(s.a.y) * den + num * (s.b.y - s.a.y);
          if (grid.col(floor_div(xn, den)) != bc || grid.row(floor_div(yn, den)) != br) continue;
          hot.push_back(IPoint{static_cast<i64>(round_div(xn, den)), static_cast<i64>(round_div(yn, den))});
          ++stats_.crossings;
        }
      }
    }
    std::sort(hot.begin(), hot.end());
    hot.erase(std::unique(hot.begin(), hot.end()), hot.end());
    stats_.hot_pixels = hot.size();

    BucketGrid hot_grid = grid;
    fill_buckets(hot_grid, hot.size(), [&](std::size_t i, auto&& put) {
      const IPoint h = hot[i];
      const i64 c0 = std::max<i64>(0, static_cast<i64>(floor_div(2 * static_cast<i128>(h.x - grid.min_x) - 1, 2 * grid.size)));
      const i64 c1 = std::min<i64>(grid.nx - 1, static_cast<i64>(floor_div(2 * static_cast<i128>(h.x - grid.min_x) + 1, 2 * grid.size)));
      const i64 r0 = std::max<i64>(0, static_cast<i64>(floor_div(2 * static_cast<i128>(h.y - grid.min_y) - 1, 2 * grid.size)));
      const i64 r1 = std::min<i64>(grid.ny - 1, static_cast<i64>(floor_div(2 * static_cast<i128>(h.y - grid.min_y) + 1, 2 * grid.size)));
      for (i64 r = r0; r <= r1; ++r)
        for (i64 c = c0; c <= c1; ++c) put(grid.id(c, r));
    });

    // Re-route each segment through the hot pixels it touches.
    std::unordered_map<IPoint, std::uint32_t, PointHash> vertex_id;
    vertex_id.reserve(hot.size() * 2);
    auto vid = [&](IPoint p) {
      auto [it, inserted] = vertex_id.try_emplace(p, static_cast<std::uint32_t>(vertices_.size()));
      if (inserted) vertices_.push_back(p);
      return it->second;
    };
    std::unordered_map<std::uint64_t, std::uint32_t> edge_id;
    edge_id.reserve(segments_.size() * 2);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edge_ends;
    std::vector<int> weights;
    std::vector<std::pair<i128, std::uint32_t>> along;
    for (const Segment& s : segments_) {
      along.clear();
      const i128 dx = s.b.x - s.a.x, dy = s.b.y - s.a.y;
      for_each_bucket(grid, s.a, s.b, [&](std::size_t b) {
        for (std::uint32_t k = hot_grid.offset[b]; k < hot_grid.offset[b + 1]; ++k) {
          const IPoint h = hot[hot_grid.items[k]];
          if (touches_pixel(s.a, s.b, h)) along.emplace_back(dx * (h.x - s.a.x) + dy * (h.y - s.a.y), hot_grid.items[k]);
        }
      });
      std::sort(along.begin(), along.end());
      along.erase(std::unique(along.begin(), along.end()), along.end());
      std::uint32_t prev = vid(s.a);
      for (const auto& [t, hi] : along) {
        const std::uint32_t cur = vid(hot[hi]);
        if (cur == prev) continue;
        const bool forward = prev < cur;
        const std::uint64_t key = forward ? (std::uint64_t{prev} << 32 | cur) : (std::uint64_t{cur} << 32 | prev);
        auto [it, inserted] = edge_id.try_emplace(key, static_cast<std::uint32_t>(edge_ends.size()));
        if (inserted) {
          edge_ends.emplace_back(forward ? prev : cur, forward ? cur : prev);
          weights.resize(weights.size() + static_cast<std::size_t>(operands_), 0);
        }
        weights[it->second * static_cast<std::size_t>(operands_) + static_cast<std::size_t>(s.operand)] += forward ? 1 : -1;
        prev = cur;
      }
      const std::uint32_t last = vid(s.b);
      if (last != prev) {
        // s.b is always hot, so this only guards against a missed pixel
        const bool forward = prev < last;
        const std::uint64_t key = forward ? (std::uint64_t{prev} << 32 | last) : (std::uint64_t{last} << 32 | prev);
        auto [it, inserted] = edge_id.try_emplace(key, static_cast<std::uint32_t>(edge_ends.size()));
        if (inserted) {
          edge_ends.emplace_back(forward ? prev : last, forward ? last : prev);
          weights.resize(weights.size() + static_cast<std::size_t>(operands_), 0);
        }
        weights[it->second * static_cast<std::size_t>(operands_) + static_cast<std::size_t>(s.operand)] += forward ? 1 : -1;
      }
    }
    build_graph(edge_ends, weights);
  }

  struct PointHash {
    std::size_t operator()(const IPoint& p) const noexcept {
      std::uint64_t h = static_cast<std::uint64_t>(p.x) * 0x9E3779B97F4A7C15ULL;
      h ^= static_cast<std::uint64_t>(p.y) + 0x7F4A7C159E3779B9ULL + (h << 6) + (h >> 2);
      return static_cast<std::size_t>(h ^ (h >> 29));
    }
  };

  void reset_graph() {
    half_dest_.clear();
    half_pos_.clear();
    half_weight_.clear();
    out_offset_.assign(1, 0);
    out_half_.clear();
    face_of_.clear();
    face_start_.clear();
    face_winding_.clear();
  }

  [[nodiscard]] std::size_t half_origin(std::size_t h) const { return half_dest_[h ^ 1]; }

  // True when direction a sorts before b counter-clockwise from +x.
  static bool angle_less(IPoint a, IPoint b) {
    const bool ua = a.y > 0 || (a.y == 0 && a.x > 0);
    const bool ub = b.y > 0 || (b.y == 0 && b.x > 0);
    if (ua != ub) return ua;
    return static_cast<i128>(a.x) * b.y - static_cast<i128>(a.y) * b.x > 0;
  }
  static bool upper_half(IPoint d) { return d.y > 0 || (d.y == 0 && d.x > 0); }

  void build_graph(const std::vector<std::pair<std::uint32_t, std::uint32_t>>& ends, const std::vector<int>& weights) {
    reset_graph();
    const std::size_t k = static_cast<std::size_t>(operands_);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> kept;
    std::vector<int> kept_w;
    for (std::size_t e = 0; e < ends.size(); ++e) {
      bool zero = true;
      for (std::size_t o = 0; o < k; ++o) zero = zero && weights[e * k + o] == 0;
      if (zero) continue;
      kept.push_back(ends[e]);
      kept_w.insert(kept_w.end(), weights.begin() + static_cast<std::ptrdiff_t>(e * k),
                    weights.begin() + static_cast<std::ptrdiff_t>((e + 1) * k));
    }
    stats_.edges = kept.size();
    const std::size_t nv = vertices_.size();
    const std::size_t nh = kept.size() * 2;
    half_dest_.resize(nh);
    half_weight_.resize(nh * k);
    for (std::size_t e = 0; e < kept.size(); ++e) {
      half_dest_[2 * e] = kept[e].second;
      half_dest_[2 * e + 1] = kept[e].first;
      for (std::size_t o = 0; o < k; ++o) {
        half_weight_[2 * e * k + o] = kept_w[e * k + o];
        half_weight_[(2 * e + 1) * k + o] = -kept_w[e * k + o];
      }
    }
    out_offset_.assign(nv + 1, 0);
    for (std::size_t h = 0; h < nh; ++h) ++out_offset_[half_origin(h) + 1];
    for (std::size_t v = 0; v < nv; ++v) out_offset_[v + 1] += out_offset_[v];
    out_half_.resize(nh);
    {
      std::vector<std::uint32_t> cursor(out_offset_.begin(), out_offset_.end() - 1);
      for (std::size_t h = 0; h < nh; ++h) out_half_[cursor[half_origin(h)]++] = static_cast<std::uint32_t>(h);
    }
    half_pos_.resize(nh);
    for (std::size_t v = 0; v < nv; ++v) {
      const IPoint o = vertices_[v];
      auto first = out_half_.begin() + out_offset_[v];
      auto last = out_half_.begin() + out_offset_[v + 1];
      std::sort(first, last, [&](std::uint32_t a, std::uint32_t b) {
        const IPoint da{vertices_[half_dest_[a]].x - o.x, vertices_[half_dest_[a]].y - o.y};
        const IPoint db{vertices_[half_dest_[b]].x - o.x, vertices_[half_dest_[b]].y - o.y};
        return angle_less(da, db);
      });
      for (auto it = first; it != last; ++it) half_pos_[*it] = static_cast<std::uint32_t>(it - first);
    }

    // Faces: next(h) is the outgoing edge just clockwise of twin(h) at h's head.
    auto next_half = [&](std::size_t h) -> std::size_t {
      const std::size_t v = half_dest_[h];
      const std::size_t deg = out_offset_[v + 1] - out_offset_[v];
      const std::size_t pos = (half_pos_[h ^ 1] + deg - 1) % deg;
      return out_half_[out_offset_[v] + pos];
    };
    face_of_.assign(nh, kNone);
    for (std::size_t h = 0; h < nh; ++h) {
      if (face_of_[h] != kNone) continue;
      const std::uint32_t f = static_cast<std::uint32_t>(face_start_.size());
      face_start_.push_back(static_cast<std::uint32_t>(h));
      std::size_t g = h;
      do {
        face_of_[g] = f;
        g = next_half(g);
      } while (g != h);
    }
    stats_.faces = face_start_.size();

    // Connected components and their leftmost-lowest vertex.
    std::vector<std::uint32_t> parent(nv);
    std::iota(parent.begin(), parent.end(), 0u);
    auto find = [&](std::uint32_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (const auto& [a, b] : kept) {
      const std::uint32_t ra = find(a), rb = find(b);
      if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
    }
    std::unordered_map<std::uint32_t, std::uint32_t> anchor;  // root -> anchor vertex
    for (std::uint32_t v = 0; v < nv; ++v) {
      if (out_offset_[v + 1] == out_offset_[v]) continue;
      const std::uint32_t r = find(v);
      auto [it, inserted] = anchor.try_emplace(r, v);
      if (!inserted && vertices_[v] < vertices_[it->second]) it->second = v;
    }
    std::vector<std::uint32_t> comp_of(nv);
    for (std::uint32_t v = 0; v < nv; ++v) comp_of[v] = find(v);
    stats_.components = anchor.size();

    face_winding_.assign(face_start_.size() * k, 0);
    std::vector<char> assigned(face_start_.size(), 0);
    std::vector<std::uint32_t> queue;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> anchors(anchor.begin(), anchor.end());
    std::sort(anchors.begin(), anchors.end());
    for (const auto& [root, p] : anchors) {
      // Outer face of the component: left face of the last outgoing edge
      // below angle pi, else of the last edge overall.
      const std::size_t lo = out_offset_[p], hi = out_offset_[p + 1];
      std::size_t pick = out_half_[hi - 1];
      for (std::size_t i = lo; i < hi; ++i) {
        const std::size_t h = out_half_[i];
        const IPoint d{vertices_[half_dest_[h]].x - vertices_[p].x, vertices_[half_dest_[h]].y - vertices_[p].y};
        if (upper_half(d)) pick = h;
      }
      const std::uint32_t outer = face_of_[pick];
      if (assigned[outer]) continue;
      // Winding just left of p: horizontal ray to -x against other components.
      const IPoint pt = vertices_[p];
      int* w = &face_winding_[outer * k];
      for (std::size_t e = 0; e < kept.size(); ++e) {
        const std::uint32_t a = kept[e].first, b = kept[e].second;
        if (comp_of[a] == root) continue;
        const IPoint u = vertices_[a], v = vertices_[b];
        const bool ub = u.y <= pt.y, vb = v.y <= pt.y;
        if (ub == vb) continue;
        if (std::max(u.x, v.x) >= pt.x && std::min(u.x, v.x) >= pt.x) continue;
        // x of the crossing < pt.x ?
        const i128 dy = v.y - u.y;
        const i128 lhs = static_cast<i128>(u.x - pt.x) * dy + static_cast<i128>(pt.y - u.y) * (v.x - u.x);
        const bool left = dy > 0 ? lhs < 0 : lhs > 0;
        if (!left) continue;
        const int s = vb ? 1 : -1;  // downward (u above the line, v on/below) counts +1
        for (std::size_t o = 0; o < k; ++o) w[o] += s * kept_w[e * k + o];
      }
      assigned[outer] = 1;
      queue.assign(1, outer);
      while (!queue.empty()) {
        const std::uint32_t f = queue.back();
        queue.pop_back();
        const std::size_t h0 = face_start_[f];
        std::size_t h = h0;
        do {
          const std::uint32_t g = face_of_[h ^ 1];
          if (!assigned[g]) {
            assigned[g] = 1;
            for (std::size_t o = 0; o < k; ++o)
              face_winding_[g * k + o] = face_winding_[f * k + o] - half_weight_[h * k + o];
            queue.push_back(g);
          }
          h = next_half(h);
        } while (h != h0);
      }
    }
  }

  void emit_ring(const std::vector<IPoint>& pts, VisPolygon& out) const {
    // drop collinear pass-through vertices
    std::vector<IPoint> r;
    r.reserve(pts.size());
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i) {
      const IPoint& prev = pts[(i + n - 1) % n];
      const IPoint& cur = pts[i];
      const IPoint& next = pts[(i + 1) % n];
      if (cross(prev, cur, next) == 0 &&
          static_cast<i128>(cur.x - prev.x) * (next.x - cur.x) + static_cast<i128>(cur.y - prev.y) * (next.y - cur.y) > 0)
        continue;
      r.push_back(cur);
    }
    if (r.size() < 3) return;
    i128 area2 = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      const IPoint& a = r[i];
      const IPoint& b = r[(i + 1) % r.size()];
      area2 += static_cast<i128>(a.x) * b.y - static_cast<i128>(b.x) * a.y;
    }
    if (area2 == 0) return;
    Ring ring;
    ring.reserve(r.size() + 1);
    for (const IPoint& p : r) ring.push_back(unsnap(p));
    ring.push_back(ring.front());
    (area2 > 0 ? out.outers : out.holes).push_back(std::move(ring));
  }

  static constexpr std::uint32_t kNone = 0xffffffffu;

  int operands_;
  std::vector<Segment> segments_;
  bool built_ = false;
  Stats stats_;

  std::vector<IPoint> vertices_;
  std::vector<std::uint32_t> half_dest_;
  std::vector<std::uint32_t> half_pos_;
  std::vector<int> half_weight_;
  std::vector<std::uint32_t> out_offset_{0};
  std::vector<std::uint32_t> out_half_;
  std::vector<std::uint32_t> face_of_;
  std::vector<std::uint32_t> face_start_;
  std::vector<int> face_winding_;
};

}  // namespace pathwise::overlay

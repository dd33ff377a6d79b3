#pragma once

// Polygons with holes, the cell mask type, and cell-center rasterization.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "pathwise/grid.hpp"
#include "pathwise/raycast.hpp"

namespace pathwise {

/// Closed vertex loop: the last vertex repeats the first.
using Ring = std::vector<Point2>;

struct VisPolygon {
  std::vector<Ring> outers;
  std::vector<Ring> holes;

  [[nodiscard]] bool empty() const noexcept { return outers.empty(); }
};

/// Twice the signed area (positive for counter-clockwise in x/y coordinates).
inline double signed_area2(std::span<const Point2> ring) {
  double a = 0.0;
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i + 1 < n; ++i) a += ring[i].x * ring[i + 1].y - ring[i + 1].x * ring[i].y;
  if (n > 1 && !(ring.front() == ring.back())) a += ring[n - 1].x * ring[0].y - ring[0].x * ring[n - 1].y;
  return a;
}

class DegeneratePolygon : public Error {
 public:
  using Error::Error;
};

/// Connects the fan vertices in angular order into one closed outer ring.
inline VisPolygon draw_polygon(const RayFan& fan) {
  Ring ring;
  ring.reserve(fan.vertices.size() + 1);
  for (const Point2& p : fan.vertices) {
    if (ring.empty() || !(ring.back() == p)) ring.push_back(p);
  }
  while (ring.size() > 1 && ring.back() == ring.front()) ring.pop_back();
  // rays ending on one straight wall give exactly collinear vertices; the
  // middle ones add nothing but cost in the overlay
  auto passes_through = [](const Point2& a, const Point2& b, const Point2& c) {
    const double cross = (b.x - a.x) * (c.y - b.y) - (b.y - a.y) * (c.x - b.x);
    const double dot = (b.x - a.x) * (c.x - b.x) + (b.y - a.y) * (c.y - b.y);
    return cross == 0.0 && dot > 0.0;
  };
  if (ring.size() > 3) {
    Ring kept;
    kept.reserve(ring.size());
    for (const Point2& p : ring) {
      while (kept.size() >= 2 && passes_through(kept[kept.size() - 2], kept.back(), p)) kept.pop_back();
      kept.push_back(p);
    }
    // the wrap-around vertex
    while (kept.size() > 3 && passes_through(kept[kept.size() - 2], kept.back(), kept.front())) kept.pop_back();
    while (kept.size() > 3 && passes_through(kept.back(), kept.front(), kept[1])) kept.erase(kept.begin());
    ring = std::move(kept);
  }
  if (ring.size() < 3) throw DegeneratePolygon("draw_polygon: fewer than 3 distinct vertices");
  ring.push_back(ring.front());
  VisPolygon poly;
  poly.outers.push_back(std::move(ring));
  return poly;
}

/// Boolean per-cell coverage over a grid.
class VisibilityMask {
 public:
  VisibilityMask() = default;
  explicit VisibilityMask(const GridGeometry& geometry) : geometry_(geometry), cells_(geometry.cell_count(), 0) {}

  [[nodiscard]] const GridGeometry& geometry() const noexcept { return geometry_; }
  [[nodiscard]] int width() const noexcept { return geometry_.width; }
  [[nodiscard]] int height() const noexcept { return geometry_.height; }
  [[nodiscard]] bool test(int x, int y) const noexcept {
    return geometry_.contains(x, y) && cells_[geometry_.index(x, y)] != 0;
  }
  [[nodiscard]] bool test(Pose p) const noexcept { return test(p.x, p.y); }
  void set(int x, int y, bool v = true) noexcept { cells_[geometry_.index(x, y)] = v ? 1 : 0; }
  [[nodiscard]] bool operator[](std::size_t i) const noexcept { return cells_[i] != 0; }
  [[nodiscard]] std::span<const std::uint8_t> cells() const noexcept { return cells_; }
  [[nodiscard]] std::span<std::uint8_t> cells() noexcept { return cells_; }

  [[nodiscard]] std::size_t count() const noexcept {
    return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
  }

  VisibilityMask& operator|=(const VisibilityMask& other) {
    if (!(other.geometry_ == geometry_)) throw Error("mask union: geometry mismatch");
    for (std::size_t i = 0; i < cells_.size(); ++i) cells_[i] |= other.cells_[i];
    return *this;
  }

  friend bool operator==(const VisibilityMask& a, const VisibilityMask& b) {
    return a.geometry_ == b.geometry_ && a.cells_ == b.cells_;
  }

  /// Calls f(x, y) for every set cell in row-major order.
  template <typename F>
  void for_each(F&& f) const {
    for (int y = 0; y < geometry_.height; ++y) {
      const std::size_t row = static_cast<std::size_t>(y) * static_cast<std::size_t>(geometry_.width);
      for (int x = 0; x < geometry_.width; ++x)
        if (cells_[row + static_cast<std::size_t>(x)]) f(x, y);
    }
  }

 private:
  GridGeometry geometry_;
  std::vector<std::uint8_t> cells_;
};

inline std::size_t symmetric_difference_count(const VisibilityMask& a, const VisibilityMask& b) {
  if (!(a.geometry() == b.geometry())) throw Error("mask comparison: geometry mismatch");
  std::size_t n = 0;
  const auto ca = a.cells();
  const auto cb = b.cells();
  for (std::size_t i = 0; i < ca.size(); ++i) n += (ca[i] != cb[i]) ? 1 : 0;
  return n;
}

namespace detail {

/// Even-odd scanline fill over cell centers. A center (x, y) is inside when
/// an odd number of edges cross the horizontal line through it at or to its
/// right, using the half-open rule (a.y <= y) != (b.y <= y) for edges.
template <typename Span>
void scan_fill(std::span<const Ring> rings, const GridGeometry& geom, Span&& on_span) {
  double ymin = std::numeric_limits<double>::infinity();
  double ymax = -std::numeric_limits<double>::infinity();
  for (const Ring& r : rings)
    for (const Point2& p : r) {
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
  if (!(ymin <= ymax)) return;
  const int row_lo = std::max(0, static_cast<int>(std::ceil(ymin)));
  const int row_hi = std::min(geom.height - 1, static_cast<int>(std::ceil(ymax)) - 1);
  if (row_lo > row_hi) return;
  const std::size_t rows = static_cast<std::size_t>(row_hi - row_lo + 1);

  // Two passes: count crossings per row, then fill a CSR table.
  std::vector<std::uint32_t> offset(rows + 1, 0);
  auto row_range = [&](Point2 a, Point2 b, int& lo, int& hi) {
    const double y0 = std::min(a.y, b.y);
    const double y1 = std::max(a.y, b.y);
    lo = std::max(row_lo, static_cast<int>(std::ceil(y0)));
    hi = std::min(row_hi, static_cast<int>(std::ceil(y1)) - 1);
  };
  for (const Ring& r : rings) {
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
      if (r[i].y == r[i + 1].y) continue;
      int lo, hi;
      row_range(r[i], r[i + 1], lo, hi);
      for (int y = lo; y <= hi; ++y) ++offset[static_cast<std::size_t>(y - row_lo) + 1];
    }
  }
  for (std::size_t i = 0; i < rows; ++i) offset[i + 1] += offset[i];
  std::vector<double> xs(offset[rows]);
  std::vector<std::uint32_t> cursor(offset.begin(), offset.end() - 1);
  for (const Ring& r : rings) {
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
      const Point2 a = r[i];
      const Point2 b = r[i + 1];
      if (a.y == b.y) continue;
      int lo, hi;
      row_range(a, b, lo, hi);
      const double inv = (b.x - a.x) / (b.y - a.y);
      for (int y = lo; y <= hi; ++y) xs[cursor[static_cast<std::size_t>(y - row_lo)]++] = a.x + (y - a.y) * inv;
    }
  }
  for (std::size_t i = 0; i < rows; ++i) {
    auto first = xs.begin() + offset[i];
    auto last = xs.begin() + offset[i + 1];
    std::sort(first, last);
    const int y = row_lo + static_cast<int>(i);
    for (auto it = first; it + 1 < last; it += 2) {
      const int x0 = std::max(0, static_cast<int>(std::ceil(*it)));
      const int x1 = std::min(geom.width - 1, static_cast<int>(std::ceil(*(it + 1))) - 1);
      if (x0 <= x1) on_span(y, x0, x1);
    }
  }
}


inline void fill_polygon(VisibilityMask& mask, const VisPolygon& poly, std::uint8_t value) {
  const GridGeometry& g = mask.geometry();
  auto cells = mask.cells();
  std::vector<Ring> rings;
  std::span<const Ring> all(poly.outers);
  if (!poly.holes.empty()) {
    rings.reserve(poly.outers.size() + poly.holes.size());
    rings.insert(rings.end(), poly.outers.begin(), poly.outers.end());
    rings.insert(rings.end(), poly.holes.begin(), poly.holes.end());
    all = rings;
  }
  scan_fill(all, g, [&](int y, int x0, int x1) {
    std::fill(cells.begin() + static_cast<std::ptrdiff_t>(g.index(x0, y)),
              cells.begin() + static_cast<std::ptrdiff_t>(g.index(x1, y)) + 1, value);
  });
}

}  // namespace detail

/// Sets cells whose centers lie inside the polygon under the even-odd rule
/// applied to all of its rings together. For a polygon whose holes sit
/// directly inside its outers this is "inside an outer ring and inside no
/// hole ring"; it also stays correct for islands nested inside holes.
/// Geometry outside the grid is clipped.
inline void rasterize_into(VisibilityMask& mask, const VisPolygon& poly) { detail::fill_polygon(mask, poly, 1); }

/// Clears every cell whose center lies inside `poly` (same rule as above).
inline void rasterize_clear(VisibilityMask& mask, const VisPolygon& poly) { detail::fill_polygon(mask, poly, 0); }

inline VisibilityMask rasterize_mask(const VisPolygon& poly, const GridGeometry& geometry) {
  VisibilityMask mask(geometry);
  rasterize_into(mask, poly);
  return mask;
}

/// Marks every cell touched by any ring segment (used to judge whether a
/// mask disagreement sits on a polygon boundary).
inline VisibilityMask ring_cells(const VisPolygon& poly, const GridGeometry& geometry) {
  VisibilityMask mask(geometry);
  auto mark_segment = [&](Point2 a, Point2 b) {
    const double len = distance(a, b);
    const int steps = std::max(1, static_cast<int>(std::ceil(len * 4.0)));
    for (int s = 0; s <= steps; ++s) {
      const double u = static_cast<double>(s) / steps;
      const double x = a.x + (b.x - a.x) * u;
      const double y = a.y + (b.y - a.y) * u;
      // a point on a cell border touches both neighbours
      const int x0 = static_cast<int>(std::floor(x + 0.5 - 1e-6));
      const int x1 = static_cast<int>(std::floor(x + 0.5 + 1e-6));
      const int y0 = static_cast<int>(std::floor(y + 0.5 - 1e-6));
      const int y1 = static_cast<int>(std::floor(y + 0.5 + 1e-6));
      for (int cy = y0; cy <= y1; ++cy)
        for (int cx = x0; cx <= x1; ++cx)
          if (geometry.contains(cx, cy)) mask.set(cx, cy);
    }
  };
  for (const auto* rings : {&poly.outers, &poly.holes})
    for (const Ring& r : *rings)
      for (std::size_t i = 0; i + 1 < r.size(); ++i) mark_segment(r[i], r[i + 1]);
  return mask;
}

}  // namespace pathwise

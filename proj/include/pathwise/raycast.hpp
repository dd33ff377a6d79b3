#pragma once

// Supercover ray traversal and the three raycasting flavours: ground truth
// (sensor simulation), observed map (rays stop only on Occupied) and
// probabilistic (running sum of predicted occupancy against a threshold).
//
// Continuous coordinates put the center of cell (x, y) at (x, y); the cell
// spans [x - 0.5, x + 0.5] x [y - 0.5, y + 0.5].

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "pathwise/grid.hpp"

namespace pathwise {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

inline double distance(Point2 a, Point2 b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

/// Ray endpoints of one scan, in order of increasing angle i * 360 / l.
struct RayFan {
  Pose origin;
  double range = 0.0;
  std::vector<Point2> vertices;
  std::vector<double> distances;  // distance of each vertex from the origin
};

struct Direction {
  double dx = 1.0;
  double dy = 0.0;
};

/// Unit direction of ray i of l. Cardinal and diagonal rays are made exactly
/// symmetric so corner crossings tie deterministically.
inline Direction ray_direction(int i, int l) {
  if ((4L * i) % l == 0) {
    switch (static_cast<int>((4L * i) / l) % 4) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      case 2: return {-1.0, 0.0};
      default: return {0.0, -1.0};
    }
  }
  const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(l);
  double c = std::cos(a);
  double s = std::sin(a);
  if (std::abs(std::abs(c) - std::abs(s)) < 1e-12) {
    const double m = std::sqrt(0.5);
    c = std::copysign(m, c);
    s = std::copysign(m, s);
  }
  return {c, s};
}

/// One cell reached by a ray. `t_far` is where the ray crosses the far
/// boundary line of this cell across the ray's dominant axis (for an exact
/// diagonal, the later of both). It never decreases along the ray, and the
/// far lines of a straight wall run are collinear.
struct CellVisit {
  int x = 0;
  int y = 0;
  double t_entry = 0.0;
  double t_far = 0.0;
  bool origin = false;
};

struct TraceEnd {
  double distance = 0.0;  // vertex distance along the ray
  bool stopped = false;   // the visitor stopped the ray on a cell
  bool left_grid = false;
};

inline constexpr double kCornerTieEps = 1e-9;

/// Walks every cell the ray from the center of `origin` touches, in order,
/// until `visit` returns true, the range is exhausted or the grid ends.
/// When the ray passes exactly through a cell corner both side cells are
/// visited (x-side first) before the diagonal cell.
template <typename Visit>
TraceEnd trace_ray(const GridGeometry& geom, Pose origin, Direction dir, double range, Visit&& visit) {
  const double inf = std::numeric_limits<double>::infinity();
  const int sx = dir.dx > 0 ? 1 : (dir.dx < 0 ? -1 : 0);
  const int sy = dir.dy > 0 ? 1 : (dir.dy < 0 ? -1 : 0);
  const double delta_x = sx != 0 ? 1.0 / std::abs(dir.dx) : inf;
  const double delta_y = sy != 0 ? 1.0 / std::abs(dir.dy) : inf;
  double t_max_x = sx != 0 ? 0.5 * delta_x : inf;
  double t_max_y = sy != 0 ? 0.5 * delta_y : inf;
  int cx = origin.x;
  int cy = origin.y;

  const bool use_x = sx != 0 && std::abs(dir.dx) >= std::abs(dir.dy);
  const bool use_y = sy != 0 && std::abs(dir.dy) >= std::abs(dir.dx);
  auto far = [&](int x, int y) {
    double t = 0.0;
    if (use_x) t = std::max(t, (x + 0.5 * sx - origin.x) / dir.dx);
    if (use_y) t = std::max(t, (y + 0.5 * sy - origin.y) / dir.dy);
    return t;
  };
  auto end_at = [&](double t, bool stopped, bool left) { return TraceEnd{std::min(t, range), stopped, left}; };
  // a ray leaving the grid ends on the far line of the last cell it was in
  double last_far = 0.0;
  auto try_visit = [&](int x, int y, double t_entry, bool is_origin, TraceEnd& end) {
    const double tf = far(x, y);
    last_far = tf;
    if (!visit(CellVisit{x, y, t_entry, tf, is_origin})) return false;
    end = end_at(tf, true, false);
    return true;
  };

  TraceEnd end;
  if (try_visit(cx, cy, 0.0, true, end)) return end;

  while (true) {
    const double t_next = std::min(t_max_x, t_max_y);
    if (!(t_next < range)) return end_at(range, false, false);
    if (std::abs(t_max_x - t_max_y) <= kCornerTieEps) {
      const double t = t_next;
      // side cells touched at the corner
      if (!geom.contains(cx + sx, cy)) return end_at(last_far, false, true);
      if (try_visit(cx + sx, cy, t, false, end)) return end;
      if (!geom.contains(cx, cy + sy)) return end_at(last_far, false, true);
      if (try_visit(cx, cy + sy, t, false, end)) return end;
      cx += sx;
      cy += sy;
      t_max_x += delta_x;
      t_max_y += delta_y;
    } else if (t_max_x < t_max_y) {
      cx += sx;
      t_max_x += delta_x;
    } else {
      cy += sy;
      t_max_y += delta_y;
    }
    if (!geom.contains(cx, cy)) return end_at(last_far, false, true);
    if (try_visit(cx, cy, t_next, false, end)) return end;
  }
}

inline Point2 point_along(Pose origin, Direction dir, double t) {
  return {origin.x + dir.dx * t, origin.y + dir.dy * t};
}

struct GroundTruthScan {
  RayFan fan;
  std::vector<RayTrace> rays;
};

inline void check_ray_args(double range, int samples) {
  if (!(range > 0.0)) throw Error("raycast: range must be > 0");
  if (samples < 8) throw Error("raycast: at least 8 samples per scan are required");
}

/// Noise-free LiDAR: each ray stops at the first Occupied cell or at `range`.
inline GroundTruthScan raycast_ground_truth(Pose pose, double range, const GroundTruthGrid& world, int samples) {
  check_ray_args(range, samples);
  if (!world.contains(pose)) throw Error("raycast: pose outside grid");
  if (world.at(pose) != CellState::Free) throw Error("raycast: pose is inside an obstacle");
  GroundTruthScan scan;
  scan.fan.origin = pose;
  scan.fan.range = range;
  scan.fan.vertices.reserve(static_cast<std::size_t>(samples));
  scan.fan.distances.reserve(static_cast<std::size_t>(samples));
  scan.rays.resize(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    const Direction dir = ray_direction(i, samples);
    RayTrace& trace = scan.rays[static_cast<std::size_t>(i)];
    const TraceEnd end = trace_ray(world.geometry(), pose, dir, range, [&](const CellVisit& v) {
      trace.cells.push_back(Pose{v.x, v.y});
      return !v.origin && world.at(v.x, v.y) == CellState::Occupied;
    });
    trace.blocked = end.stopped;
    scan.fan.vertices.push_back(point_along(pose, dir, end.distance));
    scan.fan.distances.push_back(end.distance);
  }
  return scan;
}

/// Virtual raycast on the observed map. Unknown cells are transparent.
inline RayFan raycast_observed(Pose pose, double range, const ObservedGrid& observed, int samples) {
  check_ray_args(range, samples);
  if (!observed.contains(pose)) throw Error("raycast: pose outside grid");
  RayFan fan;
  fan.origin = pose;
  fan.range = range;
  fan.vertices.reserve(static_cast<std::size_t>(samples));
  fan.distances.reserve(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    const Direction dir = ray_direction(i, samples);
    const TraceEnd end = trace_ray(observed.geometry(), pose, dir, range, [&](const CellVisit& v) {
      return !v.origin && observed.at(v.x, v.y) == CellState::Occupied;
    });
    fan.vertices.push_back(point_along(pose, dir, end.distance));
    fan.distances.push_back(end.distance);
  }
  return fan;
}

/// Probabilistic raycast: the running sum of predicted occupancy over the
/// cells a ray enters (origin excluded, each cell once) stops the ray once
/// it reaches `epsilon`.
inline RayFan raycast_probabilistic(Pose pose, double range, const PredictedGrid& predicted, double epsilon,
                                    int samples) {
  check_ray_args(range, samples);
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw Error("raycast: epsilon must lie in (0, 1]");
  if (!predicted.contains(pose)) throw Error("raycast: pose outside grid");
  RayFan fan;
  fan.origin = pose;
  fan.range = range;
  fan.vertices.reserve(static_cast<std::size_t>(samples));
  fan.distances.reserve(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    const Direction dir = ray_direction(i, samples);
    double delta = 0.0;
    const TraceEnd end = trace_ray(predicted.geometry(), pose, dir, range, [&](const CellVisit& v) {
      if (v.origin) return false;
      delta += predicted.at(v.x, v.y);
      return delta >= epsilon;
    });
    fan.vertices.push_back(point_along(pose, dir, end.distance));
    fan.distances.push_back(end.distance);
  }
  return fan;
}

}  // namespace pathwise

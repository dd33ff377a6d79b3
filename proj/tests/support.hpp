#pragma once

// Reference implementations and fixtures shared by the unit tests and the
// acceptance suite. Everything here is deliberately naive.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <random>
#include <vector>

#include "pathwise/grid.hpp"
#include "pathwise/oracle_check.hpp"
#include "pathwise/pathing.hpp"
#include "pathwise/polygon.hpp"
#include "pathwise/raycast.hpp"
#include "pathwise/visibility.hpp"

namespace testsupport {

using namespace pathwise;

inline GroundTruthGrid random_world(int w, int h, double density, std::mt19937_64& rng) {
  return random_obstacle_world(w, h, density, rng);
}

inline ObservedGrid fully_observed(const GroundTruthGrid& world) {
  ObservedGrid o(world.geometry(), CellState::Unknown);
  for (std::size_t i = 0; i < world.size(); ++i) o[i] = world[i];
  return o;
}

template <typename Rng>
Pose random_free(const GroundTruthGrid& world, Rng& rng) {
  const auto cells = free_cells(world);
  std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);
  return cells[pick(rng)];
}

/// Step-by-step single-cell march along a ray: the first Occupied cell the
/// ray's interior passes through, found by sampling the ray finely.
inline std::optional<Pose> march_first_hit(const GroundTruthGrid& world, Pose origin, Direction d, double range) {
  const double dt = 1e-4;
  Pose last = origin;
  for (double t = dt; t < range; t += dt) {
    const double px = origin.x + d.dx * t;
    const double py = origin.y + d.dy * t;
    const Pose c{static_cast<int>(std::floor(px + 0.5)), static_cast<int>(std::floor(py + 0.5))};
    if (c == last) continue;
    last = c;
    if (!world.contains(c)) return std::nullopt;
    if (world.at(c) == CellState::Occupied) return c;
  }
  return std::nullopt;
}

/// Even-odd crossing test over every ring of the polygon.
inline bool point_in_polygon(const VisPolygon& poly, double px, double py) {
  bool inside = false;
  auto scan = [&](const Ring& r) {
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
      const Point2 a = r[i];
      const Point2 b = r[i + 1];
      if ((a.y <= py) != (b.y <= py)) {
        const double x = a.x + (py - a.y) * (b.x - a.x) / (b.y - a.y);
        if (x >= px) inside = !inside;
      }
    }
  };
  for (const Ring& r : poly.outers) scan(r);
  for (const Ring& r : poly.holes) scan(r);
  return inside;
}

inline VisibilityMask pip_mask(const VisPolygon& poly, const GridGeometry& g) {
  VisibilityMask m(g);
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x)
      if (point_in_polygon(poly, x, y)) m.set(x, y);
  return m;
}

inline VisibilityMask square_mask(const GridGeometry& g, double x0, double y0, double x1, double y1) {
  VisibilityMask m(g);
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x)
      if (x >= x0 && x < x1 && y >= y0 && y < y1) m.set(x, y);
  return m;
}

inline Ring rect_ring(double x0, double y0, double x1, double y1) {
  return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}};
}

inline VisPolygon rect(double x0, double y0, double x1, double y1) {
  VisPolygon p;
  p.outers.push_back(rect_ring(x0, y0, x1, y1));
  return p;
}

/// Uniform-cost search on the same move model as A*: 8-connected, no corner
/// cutting, observed-Free cells only. Returns the exact cost or nothing.
inline std::optional<StepCost> ucs_cost(Pose start, Pose goal, const ObservedGrid& observed) {
  const GridGeometry& g = observed.geometry();
  if (observed.at(goal) != CellState::Free) return std::nullopt;
  auto passable = [&](int x, int y) { return g.contains(x, y) && observed.at(x, y) == CellState::Free; };
  const StepCost inf{std::numeric_limits<std::int64_t>::max() / 4, 0};
  std::vector<StepCost> dist(g.cell_count(), inf);
  using Item = std::pair<StepCost, std::size_t>;
  auto cmp = [](const Item& a, const Item& b) { return a.first > b.first; };
  std::priority_queue<Item, std::vector<Item>, decltype(cmp)> pq(cmp);
  dist[g.index(start.x, start.y)] = {};
  pq.push({{}, g.index(start.x, start.y)});
  while (!pq.empty()) {
    auto [d, i] = pq.top();
    pq.pop();
    if (d != dist[i]) continue;
    const int x = static_cast<int>(i % static_cast<std::size_t>(g.width));
    const int y = static_cast<int>(i / static_cast<std::size_t>(g.width));
    for (int k = 0; k < 8; ++k) {
      const int dx = kNeighborDx[k], dy = kNeighborDy[k];
      if (!passable(x + dx, y + dy)) continue;
      if (dx != 0 && dy != 0 && !passable(x + dx, y) && !passable(x, y + dy)) continue;
      const StepCost nd = d + (dx != 0 && dy != 0 ? StepCost{0, 1} : StepCost{1, 0});
      const std::size_t ni = g.index(x + dx, y + dy);
      if (nd < dist[ni]) {
        dist[ni] = nd;
        pq.push({nd, ni});
      }
    }
  }
  const StepCost r = dist[g.index(goal.x, goal.y)];
  if (r == inf) return std::nullopt;
  return r;
}

}  // namespace testsupport

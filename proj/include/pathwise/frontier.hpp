#pragma once

// Frontier cells (observed Free with an Unknown 8-neighbor), grouped into
// 8-connected clusters with a member cell as the waypoint.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "pathwise/grid.hpp"

namespace pathwise {

struct Frontier {
  int id = 0;
  std::vector<Pose> cells;  // row-major order
  Pose representative;
};

inline bool is_frontier_cell(const ObservedGrid& observed, int x, int y) {
  if (observed.at(x, y) != CellState::Free) return false;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      if (dx == 0 && dy == 0) continue;
      if (observed.contains(x + dx, y + dy) && observed.at(x + dx, y + dy) == CellState::Unknown) return true;
    }
  return false;
}

inline bool is_frontier_cell(const ObservedGrid& observed, Pose p) { return is_frontier_cell(observed, p.x, p.y); }

/// Clusters are labelled in row-major order of their first cell, which also
/// fixes the ids. Clusters smaller than `min_cluster` are dropped before ids
/// are assigned.
inline std::vector<Frontier> extract_frontiers(const ObservedGrid& observed, int min_cluster = 3) {
  const GridGeometry& g = observed.geometry();
  std::vector<std::uint8_t> is_f(g.cell_count(), 0);
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x)
      if (is_frontier_cell(observed, x, y)) is_f[g.index(x, y)] = 1;

  std::vector<std::uint8_t> seen(g.cell_count(), 0);
  std::vector<Frontier> out;
  std::vector<Pose> stack;
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      const std::size_t i0 = g.index(x, y);
      if (!is_f[i0] || seen[i0]) continue;
      Frontier f;
      seen[i0] = 1;
      stack.assign(1, Pose{x, y});
      while (!stack.empty()) {
        const Pose c = stack.back();
        stack.pop_back();
        f.cells.push_back(c);
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = c.x + dx, ny = c.y + dy;
            if (!g.contains(nx, ny)) continue;
            const std::size_t ni = g.index(nx, ny);
            if (is_f[ni] && !seen[ni]) {
              seen[ni] = 1;
              stack.push_back({nx, ny});
            }
          }
      }
      if (static_cast<int>(f.cells.size()) < min_cluster) continue;
      std::sort(f.cells.begin(), f.cells.end(), [](Pose a, Pose b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
      double cx = 0.0, cy = 0.0;
      for (const Pose& c : f.cells) {
        cx += c.x;
        cy += c.y;
      }
      cx /= static_cast<double>(f.cells.size());
      cy /= static_cast<double>(f.cells.size());
      double best = std::numeric_limits<double>::infinity();
      for (const Pose& c : f.cells) {  // row-major, so the first minimum has the lowest index
        const double d = (c.x - cx) * (c.x - cx) + (c.y - cy) * (c.y - cy);
        if (d < best) {
          best = d;
          f.representative = c;
        }
      }
      f.id = static_cast<int>(out.size());
      out.push_back(std::move(f));
    }
  }
  return out;
}

}  // namespace pathwise

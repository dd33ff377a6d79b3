#pragma once

// Randomized equivalence check of the merged path mask against the OR of
// per-pose masks, plus the fixtures it runs on.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pathwise/grid.hpp"
#include "pathwise/pathing.hpp"
#include "pathwise/polygon.hpp"
#include "pathwise/visibility.hpp"

namespace pathwise {

/// Closed world with independent random obstacles.
template <typename Rng>
GroundTruthGrid random_obstacle_world(int w, int h, double density, Rng& rng) {
  GroundTruthGrid world(GridGeometry(w, h), CellState::Free);
  std::bernoulli_distribution occ(density);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (occ(rng)) world.set(x, y, CellState::Occupied);
  close_border(world);
  return world;
}

inline std::vector<Pose> free_cells(const GroundTruthGrid& world) {
  std::vector<Pose> out;
  for (int y = 0; y < world.height(); ++y)
    for (int x = 0; x < world.width(); ++x)
      if (world.at(x, y) == CellState::Free) out.push_back({x, y});
  return out;
}

/// Random walk of at most `max_len` poses over Free cells, one 8-neighbor
/// move at a time.
template <typename Rng>
std::vector<Pose> random_walk(const GroundTruthGrid& world, Pose start, int max_len, Rng& rng) {
  std::vector<Pose> path{start};
  std::uniform_int_distribution<int> dir(0, 7);
  Pose cur = start;
  int tries = 0;
  while (static_cast<int>(path.size()) < max_len && tries < 20 * max_len) {
    ++tries;
    const int k = dir(rng);
    const Pose n{cur.x + kNeighborDx[k], cur.y + kNeighborDy[k]};
    if (!world.contains(n) || world.at(n) != CellState::Free) continue;
    cur = n;
    path.push_back(cur);
  }
  return path;
}

/// Probability map of a known world: 1 on walls, 0 elsewhere.
inline PredictedGrid binary_prediction(const GroundTruthGrid& world) {
  PredictedGrid p(world.geometry(), 0.0);
  for (std::size_t i = 0; i < world.size(); ++i) p[i] = world[i] == CellState::Occupied ? 1.0 : 0.0;
  return p;
}

/// 41x41 room holding a closed 7x7 walled pillar room, and a square walk
/// around it. No pose sees into the pillar room, yet the walk encloses it.
struct PillarLoopCase {
  GroundTruthGrid world;
  std::vector<Pose> path;
  RaySettings rays;
};

inline PillarLoopCase pillar_loop_case() {
  PillarLoopCase c{GroundTruthGrid(GridGeometry(41, 41), CellState::Free), {}, RaySettings{20.0, 360, 0.8}};
  close_border(c.world);
  for (int i = 17; i <= 23; ++i) {
    c.world.set(i, 17, CellState::Occupied);
    c.world.set(i, 23, CellState::Occupied);
    c.world.set(17, i, CellState::Occupied);
    c.world.set(23, i, CellState::Occupied);
  }
  const int lo = 10, hi = 30;
  for (int x = lo; x < hi; ++x) c.path.push_back({x, lo});
  for (int y = lo; y < hi; ++y) c.path.push_back({hi, y});
  for (int x = hi; x > lo; --x) c.path.push_back({x, hi});
  for (int y = hi; y >= lo; --y) c.path.push_back({lo, y});
  return c;
}

struct EquivalenceReport {
  std::size_t diff = 0;
  std::size_t allowed = 0;
  std::size_t oracle_area = 0;
  std::size_t off_boundary = 0;  // differing cells not next to any ring cell
  [[nodiscard]] bool ok() const { return diff <= allowed && off_boundary == 0; }
};

/// Bounded symmetric difference, with every differing cell 8-adjacent to a
/// ring cell of one of the pose polygons or of their union.
inline EquivalenceReport compare_masks(const VisibilityMask& optimized, const VisibilityMask& oracle,
                                       const std::vector<VisPolygon>& polygons, const VisPolygon& merged) {
  EquivalenceReport rep;
  const GridGeometry& g = oracle.geometry();
  rep.oracle_area = oracle.count();
  rep.diff = symmetric_difference_count(optimized, oracle);
  rep.allowed = std::max<std::size_t>(8, rep.oracle_area / 100);
  if (rep.diff == 0) return rep;
  VisibilityMask rings = ring_cells(merged, g);
  for (const VisPolygon& p : polygons) rings |= ring_cells(p, g);
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x) {
      if (optimized.test(x, y) == oracle.test(x, y)) continue;
      bool near = false;
      for (int dy = -1; dy <= 1 && !near; ++dy)
        for (int dx = -1; dx <= 1 && !near; ++dx) near = rings.test(x + dx, y + dy);
      if (!near) ++rep.off_boundary;
    }
  return rep;
}

struct OracleTrial {
  PredictedGrid map;
  std::vector<Pose> path;
  RaySettings rays;
  VisibilityMask optimized;
  VisibilityMask oracle;
  EquivalenceReport report;
};

struct OracleCheckOptions {
  int size = 64;
  int max_path = 50;
  double density = 0.08;
  double soft_rate = 0.1;  // share of free cells given probability 0.3
  RaySettings rays{20.0, 360, 0.8};
  bool extract_holes = true;
  bool include_pillar_loop = true;  // trial 0 is the constructed loop case
};

struct OracleCheckResult {
  int trials = 0;
  int failures = 0;
  std::size_t max_diff = 0;
  std::optional<OracleTrial> counterexample;  // the first failing trial
};

inline OracleTrial run_oracle_trial(PredictedGrid map, std::vector<Pose> path, RaySettings rays, bool extract_holes) {
  auto r = path_visibility_mask_detailed(std::span<const Pose>(path), map, rays, PathMaskOptions{1, extract_holes});
  OracleTrial t{std::move(map), std::move(path), rays, std::move(r.mask), {}, {}};
  t.oracle = path_visibility_mask_oracle(std::span<const Pose>(t.path), t.map, rays);
  t.report = compare_masks(t.optimized, t.oracle, r.polygons, r.merged);
  return t;
}

/// `trials` worlds from one seed; the constructed pillar loop counts as one.
inline OracleCheckResult run_oracle_check(std::uint64_t seed, int trials, const OracleCheckOptions& opt = {}) {
  if (trials < 1) throw Error("oracle check: trials must be >= 1");
  std::mt19937_64 rng(seed);
  OracleCheckResult res;
  for (int i = 0; i < trials; ++i) {
    OracleTrial t = [&] {
      if (i == 0 && opt.include_pillar_loop) {
        PillarLoopCase c = pillar_loop_case();
        return run_oracle_trial(binary_prediction(c.world), std::move(c.path), c.rays, opt.extract_holes);
      }
      GroundTruthGrid world = random_obstacle_world(opt.size, opt.size, opt.density, rng);
      const auto cells = free_cells(world);
      std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);
      std::uniform_int_distribution<int> len(1, opt.max_path);
      const Pose start = cells[pick(rng)];
      const int n = len(rng);
      auto path = random_walk(world, start, n, rng);
      PredictedGrid map = binary_prediction(world);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (std::size_t k = 0; k < map.size(); ++k)
        if (map[k] == 0.0 && u(rng) < opt.soft_rate) map[k] = 0.3;
      return run_oracle_trial(std::move(map), std::move(path), opt.rays, opt.extract_holes);
    }();
    ++res.trials;
    res.max_diff = std::max(res.max_diff, t.report.diff);
    if (!t.report.ok()) {
      ++res.failures;
      if (!res.counterexample) res.counterexample = std::move(t);
    }
  }
  return res;
}

}  // namespace pathwise

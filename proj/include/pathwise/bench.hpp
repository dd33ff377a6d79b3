#pragma once

// Timing harness: per-pose fill-and-OR path masks against the merged-polygon
// method, and frontier selection with one worker against several.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <vector>

#include "pathwise/floorplan.hpp"
#include "pathwise/frontier.hpp"
#include "pathwise/pathing.hpp"
#include "pathwise/planners.hpp"
#include "pathwise/predictor.hpp"
#include "pathwise/visibility.hpp"
#include "pathwise/worker_pool.hpp"

namespace pathwise {

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

template <typename F>
double time_seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// A walk of exactly `length` poses (if the map allows) through Free cells,
/// following the shortest path from `start` to the farthest reachable cell.
inline std::vector<Pose> long_walk(const GroundTruthGrid& world, Pose start, int length) {
  ObservedGrid o(world.geometry(), CellState::Unknown);
  for (std::size_t i = 0; i < world.size(); ++i) o[i] = world[i];
  const ShortestPathTree tree(start, o);
  // farthest in row-major scan order of cost
  Pose far = start;
  std::size_t best = 0;
  for (int y = 0; y < world.height(); y += 4)
    for (int x = 0; x < world.width(); x += 4) {
      const Pose p{x, y};
      if (!tree.reachable(p)) continue;
      const auto d = static_cast<std::size_t>(std::abs(p.x - start.x) + std::abs(p.y - start.y));
      if (d > best) {
        best = d;
        far = p;
      }
    }
  auto path = tree.path_to(far)->poses;
  if (static_cast<int>(path.size()) > length) path.resize(static_cast<std::size_t>(length));
  return path;
}

struct MaskBench {
  int width = 0;
  int height = 0;
  std::size_t samples = 0;
  double naive_s = 0.0;  // median
  double union_s = 0.0;  // median
  std::size_t diff = 0;  // cells differing between the two masks
  [[nodiscard]] double speedup() const { return union_s > 0.0 ? naive_s / union_s : 0.0; }
};

template <typename Map>
MaskBench bench_path_masks(const Map& map, std::span<const Pose> path, const RaySettings& rays, int reps) {
  MaskBench b;
  b.width = map.width();
  b.height = map.height();
  b.samples = sample_path(path, 1).size();
  std::vector<double> naive, merged;
  VisibilityMask a, m;
  for (int r = 0; r < std::max(1, reps); ++r) {
    naive.push_back(time_seconds([&] { a = path_visibility_mask_oracle(path, map, rays); }));
    merged.push_back(time_seconds([&] { m = path_visibility_mask(path, map, rays); }));
  }
  b.naive_s = median(naive);
  b.union_s = median(merged);
  b.diff = symmetric_difference_count(a, m);
  return b;
}

/// A mid-exploration snapshot of a world: everything within `radius` of the
/// start along free space is observed, the rest is Unknown.
struct SelectionScenario {
  ObservedGrid observed;
  PredictionEnsemble ensemble;
  std::vector<Frontier> frontiers;
  Pose pose;
};

inline SelectionScenario make_selection_scenario(const GroundTruthGrid& world, Pose start, double radius, int ensemble,
                                                 std::uint64_t seed) {
  SelectionScenario s{make_unknown_grid(world.geometry()), {}, {}, start};
  // sense from a coarse lattice of free poses near the start
  const int step = std::max(4, static_cast<int>(radius / 6));
  for (int y = start.y - static_cast<int>(radius); y <= start.y + static_cast<int>(radius); y += step)
    for (int x = start.x - static_cast<int>(radius); x <= start.x + static_cast<int>(radius); x += step) {
      if (!world.contains(x, y) || world.at(x, y) != CellState::Free) continue;
      if (std::hypot(x - start.x, y - start.y) > radius) continue;
      const auto scan = raycast_ground_truth({x, y}, radius / 2, world, 360);
      update_from_scan(s.observed, {x, y}, scan.rays);
    }
  const auto scan = raycast_ground_truth(start, radius / 2, world, 360);
  update_from_scan(s.observed, start, scan.rays);
  s.ensemble = StructuralPredictor().predict(s.observed, ensemble, seed);
  s.frontiers = extract_frontiers(s.observed, 3);
  return s;
}

struct SelectionBench {
  std::size_t frontiers = 0;
  int workers = 1;
  double single_s = 0.0;
  double parallel_s = 0.0;
  bool same_choice = true;
  [[nodiscard]] double reduction() const { return single_s > 0.0 ? 1.0 - parallel_s / single_s : 0.0; }
};

inline SelectionBench bench_selection(const SelectionScenario& sc, const PlannerConfig& cfg, int workers, int reps) {
  SelectionBench b;
  b.frontiers = sc.frontiers.size();
  b.workers = workers;
  PlannerInput in;
  in.pose = sc.pose;
  in.observed = &sc.observed;
  in.ensemble = &sc.ensemble;
  in.frontiers = sc.frontiers;
  in.config = cfg;
  WorkerPool one(1), many(workers);
  std::vector<double> t1, tn;
  for (int r = 0; r < std::max(1, reps); ++r) {
    Selection a, c;
    t1.push_back(time_seconds([&] { a = select_frontier(PlannerKind::Pipe, in, one); }));
    tn.push_back(time_seconds([&] { c = select_frontier(PlannerKind::Pipe, in, many); }));
    b.same_choice = b.same_choice && a.index == c.index;
  }
  b.single_s = median(t1);
  b.parallel_s = median(tn);
  return b;
}

}  // namespace pathwise

#pragma once

// Waypoint selection: the pathwise-coverage planner and five baselines
// behind one entry point. Every planner scores each reachable frontier and
// takes the argmax (nearest: argmin distance), ties going to the lowest id.
// Paths to all frontiers come from one shortest-path tree rooted at the
// robot (optimal octile costs, same as A*).

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pathwise/frontier.hpp"
#include "pathwise/pathing.hpp"
#include "pathwise/predictor.hpp"
#include "pathwise/visibility.hpp"
#include "pathwise/worker_pool.hpp"

namespace pathwise {

enum class PlannerKind { Pipe, Nearest, Nbv2d, PwNbv2d, Upen, Mapex };

inline constexpr PlannerKind kAllPlanners[] = {PlannerKind::Pipe,    PlannerKind::Nearest, PlannerKind::Nbv2d,
                                               PlannerKind::PwNbv2d, PlannerKind::Upen,    PlannerKind::Mapex};

inline std::string_view planner_name(PlannerKind k) {
  switch (k) {
    case PlannerKind::Pipe: return "pipe";
    case PlannerKind::Nearest: return "nearest";
    case PlannerKind::Nbv2d: return "nbv2d";
    case PlannerKind::PwNbv2d: return "pw-nbv2d";
    case PlannerKind::Upen: return "upen";
    case PlannerKind::Mapex: return "mapex";
  }
  return "?";
}

inline std::optional<PlannerKind> parse_planner(std::string_view name) {
  for (PlannerKind k : kAllPlanners)
    if (planner_name(k) == name) return k;
  return std::nullopt;
}

/// Whether the planner consumes the prediction ensemble.
inline bool uses_prediction(PlannerKind k) {
  return k == PlannerKind::Pipe || k == PlannerKind::Upen || k == PlannerKind::Mapex;
}

struct PlannerConfig {
  RaySettings rays;
  int stride = 1;  // path sampling step for masks and uncertainty sums
};

struct PlannerInput {
  Pose pose;
  const ObservedGrid* observed = nullptr;
  const PredictionEnsemble* ensemble = nullptr;  // required by pipe, upen, mapex
  std::span<const Frontier> frontiers;
  PlannerConfig config;
};

struct FrontierScore {
  int id = 0;
  bool reachable = false;
  bool scored = false;       // false for unreachable frontiers and zero-length paths without gain
  double info_gain = 0.0;
  double normalizer = 0.0;   // path length or Euclidean distance
  double score = 0.0;
  GridPath path;
};

struct Selection {
  std::optional<std::size_t> index;  // into the input frontier list
  std::vector<FrontierScore> scores;  // one per input frontier, in input order
};

namespace detail {

inline double sum_over(const UncertaintyGrid& u, const VisibilityMask& mask) {
  double s = 0.0;
  const auto cells = mask.cells();
  const auto vals = u.cells();
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (cells[i]) s += vals[i];
  return s;
}

inline double unknown_in(const ObservedGrid& o, const VisibilityMask& mask) {
  std::size_t n = 0;
  const auto cells = mask.cells();
  const auto st = o.cells();
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (cells[i] && st[i] == CellState::Unknown) ++n;
  return static_cast<double>(n);
}

inline double euclid(Pose a, Pose b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Shared per-selection state: one shortest-path tree from the robot and
/// memoized path-mask work on the map the planner ray-casts against.
struct SelectionContext {
  ShortestPathTree tree;
  std::optional<PathMaskCache<PredictedGrid>> fused_masks;
  std::optional<PathMaskCache<ObservedGrid>> observed_masks;
};

inline void score_frontier(PlannerKind kind, const PlannerInput& in, SelectionContext& ctx, const Frontier& f,
                           FrontierScore& out) {
  out.id = f.id;
  auto path = ctx.tree.path_to(f.representative);
  if (!path) return;
  out.reachable = true;
  out.path = std::move(*path);
  const std::span<const Pose> poses(out.path.poses);
  const RaySettings& rays = in.config.rays;
  switch (kind) {
    case PlannerKind::Pipe: {
      const auto mask = ctx.fused_masks->mask(poses, PathMaskOptions{in.config.stride, true});
      out.info_gain = sum_over(in.ensemble->uncertainty, mask);
      out.normalizer = out.path.length();
      break;
    }
    case PlannerKind::Nearest:
      out.info_gain = 0.0;
      out.normalizer = euclid(in.pose, f.representative);
      out.scored = true;
      out.score = -out.normalizer;
      return;
    case PlannerKind::Nbv2d: {
      const auto mask = point_visibility_mask(f.representative, *in.observed, rays);
      out.info_gain = unknown_in(*in.observed, mask);
      out.normalizer = euclid(in.pose, f.representative);
      break;
    }
    case PlannerKind::PwNbv2d: {
      const auto mask = ctx.observed_masks->mask(poses, PathMaskOptions{in.config.stride, true});
      out.info_gain = unknown_in(*in.observed, mask);
      out.normalizer = out.path.length();
      break;
    }
    case PlannerKind::Upen: {
      double s = 0.0;
      for (const Pose& p : sample_path(poses, in.config.stride)) s += in.ensemble->uncertainty.at(p);
      out.info_gain = s;
      out.normalizer = out.path.length();
      break;
    }
    case PlannerKind::Mapex: {
      const auto mask = point_visibility_mask(f.representative, in.ensemble->fused, rays);
      out.info_gain = sum_over(in.ensemble->uncertainty, mask);
      out.normalizer = euclid(in.pose, f.representative);
      break;
    }
  }
  if (out.normalizer > 0.0) {
    out.scored = true;
    out.score = out.info_gain / out.normalizer;
  } else if (out.info_gain > 0.0) {
    out.scored = true;
    out.score = std::numeric_limits<double>::infinity();
  }
}

}  // namespace detail

/// Scores every frontier (in parallel on `pool`) and picks the best one.
inline Selection select_frontier(PlannerKind kind, const PlannerInput& in, WorkerPool& pool) {
  if (!in.observed) throw Error("planner: observed map missing");
  if (uses_prediction(kind) && !in.ensemble) throw Error("planner: prediction ensemble missing");
  Selection sel;
  sel.scores.resize(in.frontiers.size());
  if (in.frontiers.empty()) return sel;
  detail::SelectionContext ctx{ShortestPathTree(in.pose, *in.observed), std::nullopt, std::nullopt};
  if (kind == PlannerKind::Pipe) ctx.fused_masks.emplace(in.ensemble->fused, in.config.rays);
  if (kind == PlannerKind::PwNbv2d) ctx.observed_masks.emplace(*in.observed, in.config.rays);
  pool.parallel_for(in.frontiers.size(),
                    [&](std::size_t i) { detail::score_frontier(kind, in, ctx, in.frontiers[i], sel.scores[i]); });
  for (std::size_t i = 0; i < sel.scores.size(); ++i) {
    const FrontierScore& s = sel.scores[i];
    if (!s.scored) continue;
    if (!sel.index || s.score > sel.scores[*sel.index].score ||
        (s.score == sel.scores[*sel.index].score && s.id < sel.scores[*sel.index].id))
      sel.index = i;
  }
  return sel;
}

inline Selection select_frontier(PlannerKind kind, const PlannerInput& in) {
  WorkerPool inline_pool(1);
  return select_frontier(kind, in, inline_pool);
}

}  // namespace pathwise

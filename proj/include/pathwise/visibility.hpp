#pragma once

// Sensor-coverage masks: a single pose (raycast -> polygon -> fill), and a
// whole path either by OR-ing per-pose masks (the reference) or by merging
// all pose polygons, removing trapped regions and filling once.

#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "pathwise/grid.hpp"
#include "pathwise/overlay.hpp"
#include "pathwise/pathing.hpp"
#include "pathwise/polygon.hpp"
#include "pathwise/raycast.hpp"

namespace pathwise {

struct RaySettings {
  double range = 200.0;  // lambda, in cells
  int samples = 360;     // rays per scan
  double epsilon = 0.8;  // probabilistic stop threshold
};

inline RayFan cast_fan(Pose pose, const PredictedGrid& predicted, const RaySettings& s) {
  return raycast_probabilistic(pose, s.range, predicted, s.epsilon, s.samples);
}

inline RayFan cast_fan(Pose pose, const ObservedGrid& observed, const RaySettings& s) {
  return raycast_observed(pose, s.range, observed, s.samples);
}

template <typename Map>
VisibilityMask point_visibility_mask(Pose pose, const Map& map, const RaySettings& s) {
  return rasterize_mask(draw_polygon(cast_fan(pose, map, s)), map.geometry());
}

namespace detail {

inline VisPolygon merge_group(std::span<const VisPolygon> polys) {
  overlay::Overlay ov(1);
  for (const VisPolygon& p : polys) ov.add_polygon(p, 0);
  return ov.extract([](const int* w) { return w[0] > 0; });
}

}  // namespace detail

/// Boolean union. Polygons are merged in small groups and the partial
/// results merged pairwise, so edges interior to the union are discarded
/// early instead of all crossing each other in one arrangement.
inline VisPolygon polygon_union(std::span<const VisPolygon> polys) {
  constexpr std::size_t kGroup = 4;
  std::vector<VisPolygon> level;
  level.reserve((polys.size() + kGroup - 1) / kGroup);
  for (std::size_t i = 0; i < polys.size(); i += kGroup)
    level.push_back(detail::merge_group(polys.subspan(i, std::min(kGroup, polys.size() - i))));
  while (level.size() > 1) {
    std::vector<VisPolygon> next;
    next.reserve((level.size() + 1) / 2);
    for (std::size_t i = 0; i < level.size(); i += 2)
      next.push_back(i + 1 < level.size() ? detail::merge_group(std::span<const VisPolygon>(&level[i], 2))
                                          : std::move(level[i]));
    level = std::move(next);
  }
  return level.empty() ? VisPolygon{} : std::move(level.front());
}

/// The union with its trapped regions filled, and the trapped regions.
struct HoleSplit {
  VisPolygon shell;  // region enclosed by the union's outer boundaries
  VisPolygon holes;  // enclosed regions covered by no input polygon
};

/// Trapped regions of `union_poly`: every part of the area enclosed by its
/// outer boundaries that no input covers. Since each input lies inside the
/// union, this is the enclosed area minus the union itself, so `polys` only
/// serves as documentation of the precondition.
inline HoleSplit extract_holes(std::span<const VisPolygon> polys, const VisPolygon& union_poly) {
  (void)polys;
  overlay::Overlay ov(2);
  ov.add_polygon(union_poly, 0);
  for (const Ring& r : union_poly.outers) ov.add_ring(r, 1);
  HoleSplit out;
  out.shell = ov.extract([](const int* w) { return w[1] > 0; });
  out.holes = ov.extract([](const int* w) { return w[1] > 0 && w[0] <= 0; });
  return out;
}

struct PathMaskOptions {
  int stride = 1;
  bool extract_holes = true;  // off only to demonstrate what the hole step prevents
};

struct PathMaskResult {
  VisibilityMask mask;
  std::vector<VisPolygon> polygons;  // one per sampled pose
  VisPolygon merged;
  VisPolygon holes;
};

/// Coverage along a path: fans at the sampled poses, one union, trapped
/// regions removed, a single fill.
template <typename Map>
PathMaskResult path_visibility_mask_detailed(std::span<const Pose> path, const Map& map, const RaySettings& s,
                                             const PathMaskOptions& opt = {}) {
  if (path.empty()) throw Error("path_visibility_mask: empty path");
  PathMaskResult r;
  for (const Pose& p : sample_path(path, opt.stride)) r.polygons.push_back(draw_polygon(cast_fan(p, map, s)));
  r.merged = polygon_union(r.polygons);
  r.mask = VisibilityMask(map.geometry());
  if (opt.extract_holes) {
    HoleSplit split = extract_holes(r.polygons, r.merged);
    rasterize_into(r.mask, split.shell);
    rasterize_clear(r.mask, split.holes);
    r.holes = std::move(split.holes);
  } else {
    // the enclosed area of the union, trapped regions included
    VisPolygon shell;
    shell.outers = r.merged.outers;
    overlay::Overlay ov(1);
    ov.add_polygon(shell, 0);
    rasterize_into(r.mask, ov.extract([](const int* w) { return w[0] > 0; }));
  }
  return r;
}

template <typename Map>
VisibilityMask path_visibility_mask(std::span<const Pose> path, const Map& map, const RaySettings& s,
                                    const PathMaskOptions& opt = {}) {
  return std::move(path_visibility_mask_detailed(path, map, s, opt).mask);
}

/// Path masks for many paths over one map snapshot. Fan polygons and the
/// partial unions of polygon_union's merge tree are memoized by the poses
/// they cover, so paths with a common prefix (e.g. read from one
/// shortest-path tree) share that work. Results are identical to
/// path_visibility_mask. Safe to use from several threads.
template <typename Map>
class PathMaskCache {
 public:
  PathMaskCache(const Map& map, RaySettings s) : map_(map), s_(s) {}

  VisibilityMask mask(std::span<const Pose> path, const PathMaskOptions& opt = {}) {
    if (path.empty()) throw Error("path_visibility_mask: empty path");
    const std::vector<Pose> samples = sample_path(path, opt.stride);
    const std::size_t n = samples.size();
    int top = 0;
    while ((std::size_t{kGroup} << top) < n) ++top;
    const auto merged = node(samples, top, 0);
    VisibilityMask out(map_.geometry());
    if (opt.extract_holes) {
      HoleSplit split = extract_holes({}, *merged);
      rasterize_into(out, split.shell);
      rasterize_clear(out, split.holes);
    } else {
      VisPolygon shell;
      shell.outers = merged->outers;
      overlay::Overlay ov(1);
      ov.add_polygon(shell, 0);
      rasterize_into(out, ov.extract([](const int* w) { return w[0] > 0; }));
    }
    return out;
  }

 private:
  static constexpr std::size_t kGroup = 4;
  using Key = std::pair<int, std::vector<Pose>>;
  using Ptr = std::shared_ptr<const VisPolygon>;

  struct PoseLess {
    bool operator()(const Key& a, const Key& b) const {
      if (a.first != b.first) return a.first < b.first;
      return std::lexicographical_compare(a.second.begin(), a.second.end(), b.second.begin(), b.second.end(),
                                          [](Pose p, Pose q) { return p.y != q.y ? p.y < q.y : p.x < q.x; });
    }
  };

  Ptr lookup(const Key& k) {
    std::lock_guard lock(mu_);
    auto it = memo_.find(k);
    return it == memo_.end() ? nullptr : it->second;
  }
  Ptr store(Key k, VisPolygon p) {
    auto ptr = std::make_shared<const VisPolygon>(std::move(p));
    std::lock_guard lock(mu_);
    return memo_.emplace(std::move(k), std::move(ptr)).first->second;
  }

  Ptr fan(Pose p) {
    Key k{-1, {p}};
    if (auto hit = lookup(k)) return hit;
    return store(std::move(k), draw_polygon(cast_fan(p, map_, s_)));
  }

  // Node j of level `level` covers samples [j * 4 * 2^level, (j + 1) * 4 * 2^level).
  Ptr node(const std::vector<Pose>& samples, int level, std::size_t j) {
    const std::size_t width = kGroup << level;
    const std::size_t lo = j * width;
    const std::size_t hi = std::min(samples.size(), lo + width);
    if (level > 0 && lo + (width / 2) >= hi) return node(samples, level - 1, 2 * j);  // carried up unmerged
    Key k{level, std::vector<Pose>(samples.begin() + static_cast<std::ptrdiff_t>(lo),
                                   samples.begin() + static_cast<std::ptrdiff_t>(hi))};
    if (auto hit = lookup(k)) return hit;
    std::vector<VisPolygon> parts;
    if (level == 0) {
      for (std::size_t i = lo; i < hi; ++i) parts.push_back(*fan(samples[i]));
    } else {
      parts.push_back(*node(samples, level - 1, 2 * j));
      parts.push_back(*node(samples, level - 1, 2 * j + 1));
    }
    return store(std::move(k), detail::merge_group(parts));
  }

  const Map& map_;
  RaySettings s_;
  std::mutex mu_;
  std::map<Key, Ptr, PoseLess> memo_;
};

/// Reference semantics: the OR of the point masks at every sampled pose.
template <typename Map>
VisibilityMask path_visibility_mask_oracle(std::span<const Pose> path, const Map& map, const RaySettings& s,
                                           int stride = 1) {
  if (path.empty()) throw Error("path_visibility_mask: empty path");
  VisibilityMask out(map.geometry());
  for (const Pose& p : sample_path(path, stride)) out |= point_visibility_mask(p, map, s);
  return out;
}

}  // namespace pathwise

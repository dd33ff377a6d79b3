#pragma once

// A* on the 8-connected observed-free grid, exact octile path costs, and
// path sampling.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "pathwise/grid.hpp"

namespace pathwise {

/// Path cost a + b*sqrt(2) kept as the exact pair of step counts. Two
/// different pairs never denote the same length since sqrt(2) is irrational.
struct StepCost {
  std::int64_t cardinal = 0;
  std::int64_t diagonal = 0;

  [[nodiscard]] double length() const noexcept {
    return static_cast<double>(cardinal) + static_cast<double>(diagonal) * std::numbers::sqrt2;
  }

  friend StepCost operator+(StepCost a, StepCost b) noexcept {
    return {a.cardinal + b.cardinal, a.diagonal + b.diagonal};
  }
  friend bool operator==(const StepCost&, const StepCost&) = default;

  friend std::strong_ordering operator<=>(const StepCost& a, const StepCost& b) noexcept {
    // sign of (a.c - b.c) + (a.d - b.d) * sqrt2
    const std::int64_t p = a.cardinal - b.cardinal;
    const std::int64_t q = a.diagonal - b.diagonal;
    if (p == 0 && q == 0) return std::strong_ordering::equal;
    if (p >= 0 && q >= 0) return std::strong_ordering::greater;
    if (p <= 0 && q <= 0) return std::strong_ordering::less;
    // opposite signs: compare p^2 with 2 q^2
    const __int128 pp = static_cast<__int128>(p) * p;
    const __int128 qq = 2 * static_cast<__int128>(q) * q;
    if (p > 0) return pp > qq ? std::strong_ordering::greater : std::strong_ordering::less;
    return pp > qq ? std::strong_ordering::less : std::strong_ordering::greater;
  }
};

inline StepCost octile(Pose a, Pose b) noexcept {
  const std::int64_t dx = std::abs(a.x - b.x);
  const std::int64_t dy = std::abs(a.y - b.y);
  const std::int64_t d = std::min(dx, dy);
  return {std::max(dx, dy) - d, d};
}

struct GridPath {
  std::vector<Pose> poses;
  StepCost cost;

  [[nodiscard]] double length() const noexcept { return cost.length(); }
  [[nodiscard]] bool empty() const noexcept { return poses.empty(); }
};

inline bool are_neighbors(Pose a, Pose b) noexcept {
  const int dx = std::abs(a.x - b.x);
  const int dy = std::abs(a.y - b.y);
  return std::max(dx, dy) == 1;
}

inline constexpr int kNeighborDx[8] = {1, 0, -1, 0, 1, -1, -1, 1};
inline constexpr int kNeighborDy[8] = {0, 1, 0, -1, 1, 1, -1, -1};

/// Whether the move a -> a + (dx, dy) is legal on `passable`: the target is
/// passable and a diagonal move does not squeeze between two blocked cells
/// sharing the corner.
template <typename Passable>
bool step_allowed(Passable&& passable, int x, int y, int dx, int dy) {
  if (!passable(x + dx, y + dy)) return false;
  if (dx != 0 && dy != 0) return passable(x + dx, y) || passable(x, y + dy);
  return true;
}

/// Reusable A* search state. Per-cell arrays are invalidated by a search
/// stamp instead of being cleared, so repeated queries on a large grid only
/// pay for the cells they touch.
class AStarSearch {
 public:
  AStarSearch() = default;

  /// A* through observed Free cells. Unknown and Occupied are not
  /// traversable. Diagonal moves between two blocked orthogonal cells are
  /// forbidden. Ties are broken by (f, h, row-major index).
  std::optional<GridPath> find(Pose start, Pose goal, const ObservedGrid& observed) {
    const GridGeometry& g = observed.geometry();
    if (!g.contains(start.x, start.y) || !g.contains(goal.x, goal.y)) return std::nullopt;
    if (observed.at(start) != CellState::Free) throw Error("astar: start cell is not observed free");
    if (observed.at(goal) != CellState::Free) return std::nullopt;
    if (start == goal) return GridPath{{start}, {}};
    prepare(g.cell_count());
    auto passable = [&](int x, int y) { return g.contains(x, y) && observed.at(x, y) == CellState::Free; };

    open_.clear();
    const auto start_idx = static_cast<std::uint32_t>(g.index(start.x, start.y));
    const auto goal_idx = static_cast<std::uint32_t>(g.index(goal.x, goal.y));
    touch(start_idx);
    best_[start_idx] = {};
    push({octile(start, goal), octile(start, goal), start_idx});
    bool reached = false;
    while (!open_.empty()) {
      std::pop_heap(open_.begin(), open_.end(), Worse{});
      const Node n = open_.back();
      open_.pop_back();
      if (closed_[n.index] == stamp_) continue;
      closed_[n.index] = stamp_;
      if (n.index == goal_idx) {
        reached = true;
        break;
      }
      const int x = static_cast<int>(n.index % static_cast<std::uint32_t>(g.width));
      const int y = static_cast<int>(n.index / static_cast<std::uint32_t>(g.width));
      for (int k = 0; k < 8; ++k) {
        const int dx = kNeighborDx[k], dy = kNeighborDy[k];
        if (!step_allowed(passable, x, y, dx, dy)) continue;
        const auto ni = static_cast<std::uint32_t>(g.index(x + dx, y + dy));
        touch(ni);
        if (closed_[ni] == stamp_) continue;
        const StepCost cand = best_[n.index] + (dx != 0 && dy != 0 ? StepCost{0, 1} : StepCost{1, 0});
        if (cand < best_[ni]) {
          best_[ni] = cand;
          parent_[ni] = n.index;
          const StepCost h = octile(Pose{x + dx, y + dy}, goal);
          push({cand + h, h, ni});
        }
      }
    }
    if (!reached) return std::nullopt;
    GridPath path;
    path.cost = best_[goal_idx];
    for (std::uint32_t i = goal_idx;; i = parent_[i]) {
      path.poses.push_back(Pose{static_cast<int>(i % static_cast<std::uint32_t>(g.width)),
                                static_cast<int>(i / static_cast<std::uint32_t>(g.width))});
      if (i == start_idx) break;
    }
    std::reverse(path.poses.begin(), path.poses.end());
    return path;
  }

 private:
  struct Node {
    StepCost f;
    StepCost h;
    std::uint32_t index;
  };
  struct Worse {
    bool operator()(const Node& a, const Node& b) const noexcept {
      if (a.f != b.f) return a.f > b.f;
      if (a.h != b.h) return a.h > b.h;
      return a.index > b.index;
    }
  };

  void prepare(std::size_t cells) {
    if (best_.size() != cells) {
      best_.assign(cells, {});
      parent_.assign(cells, 0);
      seen_.assign(cells, 0);
      closed_.assign(cells, 0);
      stamp_ = 0;
    }
    if (++stamp_ == 0) {
      std::fill(seen_.begin(), seen_.end(), 0u);
      std::fill(closed_.begin(), closed_.end(), 0u);
      stamp_ = 1;
    }
  }
  void touch(std::uint32_t i) {
    if (seen_[i] != stamp_) {
      seen_[i] = stamp_;
      best_[i] = StepCost{std::numeric_limits<std::int64_t>::max() / 4, 0};
    }
  }
  void push(Node n) {
    open_.push_back(n);
    std::push_heap(open_.begin(), open_.end(), Worse{});
  }

  std::vector<StepCost> best_;
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> seen_;
  std::vector<std::uint32_t> closed_;
  std::vector<Node> open_;
  std::uint32_t stamp_ = 0;
};

inline std::optional<GridPath> astar(Pose start, Pose goal, const ObservedGrid& observed) {
  AStarSearch search;
  return search.find(start, goal, observed);
}

/// Uniform-cost search from one source over observed Free cells, with the
/// same moves and exact costs as AStarSearch. Paths read from the tree share
/// their common prefixes, which lets path-mask work be reused across goals.
class ShortestPathTree {
 public:
  ShortestPathTree(Pose source, const ObservedGrid& observed) : g_(observed.geometry()), source_(source) {
    if (!g_.contains(source.x, source.y)) throw Error("shortest-path tree: source outside the grid");
    if (observed.at(source) != CellState::Free) throw Error("shortest-path tree: source is not observed free");
    const std::size_t n = g_.cell_count();
    best_.assign(n, StepCost{std::numeric_limits<std::int64_t>::max() / 4, 0});
    parent_.assign(n, kNone);
    std::vector<std::uint8_t> closed(n, 0);
    auto passable = [&](int x, int y) { return g_.contains(x, y) && observed.at(x, y) == CellState::Free; };
    struct Node {
      StepCost cost;
      std::uint32_t index;
    };
    auto worse = [](const Node& a, const Node& b) {
      if (a.cost != b.cost) return a.cost > b.cost;
      return a.index > b.index;
    };
    std::vector<Node> open;
    const auto s = static_cast<std::uint32_t>(g_.index(source.x, source.y));
    best_[s] = {};
    parent_[s] = s;
    open.push_back({{}, s});
    while (!open.empty()) {
      std::pop_heap(open.begin(), open.end(), worse);
      const Node nd = open.back();
      open.pop_back();
      if (closed[nd.index]) continue;
      closed[nd.index] = 1;
      const int x = static_cast<int>(nd.index % static_cast<std::uint32_t>(g_.width));
      const int y = static_cast<int>(nd.index / static_cast<std::uint32_t>(g_.width));
      for (int k = 0; k < 8; ++k) {
        const int dx = kNeighborDx[k], dy = kNeighborDy[k];
        if (!step_allowed(passable, x, y, dx, dy)) continue;
        const auto ni = static_cast<std::uint32_t>(g_.index(x + dx, y + dy));
        if (closed[ni]) continue;
        const StepCost cand = nd.cost + (dx != 0 && dy != 0 ? StepCost{0, 1} : StepCost{1, 0});
        if (cand < best_[ni]) {
          best_[ni] = cand;
          parent_[ni] = nd.index;
          open.push_back({cand, ni});
          std::push_heap(open.begin(), open.end(), worse);
        }
      }
    }
  }

  [[nodiscard]] bool reachable(Pose p) const {
    return g_.contains(p.x, p.y) && parent_[g_.index(p.x, p.y)] != kNone;
  }

  [[nodiscard]] std::optional<GridPath> path_to(Pose goal) const {
    if (!reachable(goal)) return std::nullopt;
    GridPath path;
    auto i = static_cast<std::uint32_t>(g_.index(goal.x, goal.y));
    path.cost = best_[i];
    const auto s = static_cast<std::uint32_t>(g_.index(source_.x, source_.y));
    for (;; i = parent_[i]) {
      path.poses.push_back(Pose{static_cast<int>(i % static_cast<std::uint32_t>(g_.width)),
                                static_cast<int>(i / static_cast<std::uint32_t>(g_.width))});
      if (i == s) break;
    }
    std::reverse(path.poses.begin(), path.poses.end());
    return path;
  }

 private:
  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
  GridGeometry g_;
  Pose source_;
  std::vector<StepCost> best_;
  std::vector<std::uint32_t> parent_;
};

/// Indices 0, stride, 2*stride, ... plus the last index exactly once.
inline std::vector<std::size_t> sample_indices(std::size_t count, int stride) {
  if (count == 0) throw Error("sample_path: empty path");
  if (stride < 1) throw Error("sample_path: stride must be >= 1");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < count; i += static_cast<std::size_t>(stride)) idx.push_back(i);
  if (idx.back() != count - 1) idx.push_back(count - 1);
  return idx;
}

inline std::vector<Pose> sample_path(std::span<const Pose> poses, int stride) {
  std::vector<Pose> out;
  for (std::size_t i : sample_indices(poses.size(), stride)) out.push_back(poses[i]);
  return out;
}

inline std::vector<Pose> sample_path(const GridPath& path, int stride) { return sample_path(path.poses, stride); }

}  // namespace pathwise

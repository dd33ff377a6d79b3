#pragma once

// Occupancy-grid layers shared by the simulator, the predictors and the
// planners. Storage is row-major with x = column, y = row, origin top-left.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pathwise {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GridGeometry {
  int width = 0;
  int height = 0;
  double resolution = 10.0;  // cells per meter

  GridGeometry() = default;
  GridGeometry(int w, int h, double res = 10.0) : width(w), height(h), resolution(res) {
    if (w < 1 || h < 1) throw Error("grid geometry: width and height must be >= 1");
    if (!(res > 0.0)) throw Error("grid geometry: resolution must be > 0");
  }

  [[nodiscard]] std::size_t cell_count() const noexcept {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  [[nodiscard]] bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width && y < height;
  }
  [[nodiscard]] std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
  }
  [[nodiscard]] bool is_border(int x, int y) const noexcept {
    return x == 0 || y == 0 || x == width - 1 || y == height - 1;
  }

  friend bool operator==(const GridGeometry& a, const GridGeometry& b) noexcept {
    return a.width == b.width && a.height == b.height && a.resolution == b.resolution;
  }
};

enum class CellState : std::uint8_t { Free = 0, Occupied = 1, Unknown = 2 };

/// Integer cell coordinate of the robot or of a path waypoint.
struct Pose {
  int x = 0;
  int y = 0;

  friend auto operator<=>(const Pose&, const Pose&) = default;
};

/// Dense per-cell layer. The tag keeps ground truth, observations, predictions
/// and uncertainty from being mixed up at call sites.
template <typename Value, typename Tag>
class GridLayer {
 public:
  using value_type = Value;

  GridLayer() = default;
  GridLayer(GridGeometry geometry, Value fill) : geometry_(geometry), cells_(geometry.cell_count(), fill) {}

  [[nodiscard]] const GridGeometry& geometry() const noexcept { return geometry_; }
  [[nodiscard]] int width() const noexcept { return geometry_.width; }
  [[nodiscard]] int height() const noexcept { return geometry_.height; }
  [[nodiscard]] std::size_t size() const noexcept { return cells_.size(); }
  [[nodiscard]] bool contains(int x, int y) const noexcept { return geometry_.contains(x, y); }
  [[nodiscard]] bool contains(Pose p) const noexcept { return geometry_.contains(p.x, p.y); }

  [[nodiscard]] Value at(int x, int y) const noexcept { return cells_[geometry_.index(x, y)]; }
  [[nodiscard]] Value at(Pose p) const noexcept { return at(p.x, p.y); }
  void set(int x, int y, Value v) noexcept { cells_[geometry_.index(x, y)] = v; }
  void set(Pose p, Value v) noexcept { set(p.x, p.y, v); }

  [[nodiscard]] Value operator[](std::size_t i) const noexcept { return cells_[i]; }
  Value& operator[](std::size_t i) noexcept { return cells_[i]; }

  [[nodiscard]] std::span<const Value> cells() const noexcept { return cells_; }
  [[nodiscard]] std::span<Value> cells() noexcept { return cells_; }

  friend bool operator==(const GridLayer& a, const GridLayer& b) {
    return a.geometry_ == b.geometry_ && a.cells_ == b.cells_;
  }

 private:
  GridGeometry geometry_;
  std::vector<Value> cells_;
};

struct ground_truth_tag {};
struct observed_tag {};
struct predicted_tag {};
struct uncertainty_tag {};

/// Binary world; Unknown never appears.
using GroundTruthGrid = GridLayer<CellState, ground_truth_tag>;
/// Tri-state map built from noise-free scans (O_t).
using ObservedGrid = GridLayer<CellState, observed_tag>;
/// Occupancy probability per cell, one ensemble member or the fused mean.
using PredictedGrid = GridLayer<double, predicted_tag>;
/// Per-cell ensemble variance.
using UncertaintyGrid = GridLayer<double, uncertainty_tag>;

inline ObservedGrid make_unknown_grid(const GridGeometry& geometry) {
  return ObservedGrid(geometry, CellState::Unknown);
}

/// Forces the outer ring of cells to Occupied so every ray terminates.
inline void close_border(GroundTruthGrid& world) {
  const int w = world.width();
  const int h = world.height();
  for (int x = 0; x < w; ++x) {
    world.set(x, 0, CellState::Occupied);
    world.set(x, h - 1, CellState::Occupied);
  }
  for (int y = 0; y < h; ++y) {
    world.set(0, y, CellState::Occupied);
    world.set(w - 1, y, CellState::Occupied);
  }
}

/// One ray of a ground-truth scan: the cells it traversed in order, and
/// whether the last of them is the obstacle that stopped it.
struct RayTrace {
  std::vector<Pose> cells;
  bool blocked = false;
};

/// Integrates one noise-free scan. Traversed cells become Free, the stopping
/// obstacle becomes Occupied. Knowledge never downgrades; a contradicting
/// update means the scan did not come from the same world and is a bug.
inline void update_from_scan(ObservedGrid& observed, Pose pose, std::span<const RayTrace> rays) {
  if (!observed.contains(pose)) throw Error("update_from_scan: pose outside grid");
  for (const RayTrace& ray : rays) {
    for (const Pose& c : ray.cells) {
      if (!observed.contains(c)) throw Error("update_from_scan: scan references a cell outside the grid");
    }
  }
  auto mark = [&](Pose c, CellState s) {
    const CellState prev = observed.at(c);
    if (prev == CellState::Unknown) {
      observed.set(c, s);
    } else if (prev != s) {
      throw std::logic_error("update_from_scan: observation contradicts an earlier scan");
    }
  };
  for (const RayTrace& ray : rays) {
    const std::size_t n = ray.cells.size();
    for (std::size_t i = 0; i < n; ++i) {
      const bool terminal = ray.blocked && i + 1 == n;
      mark(ray.cells[i], terminal ? CellState::Occupied : CellState::Free);
    }
  }
}

inline std::size_t known_count(const ObservedGrid& observed) {
  const auto cells = observed.cells();
  return static_cast<std::size_t>(
      std::count_if(cells.begin(), cells.end(), [](CellState s) { return s != CellState::Unknown; }));
}

inline double known_fraction(const ObservedGrid& observed) {
  if (observed.size() == 0) return 0.0;
  return static_cast<double>(known_count(observed)) / static_cast<double>(observed.size());
}

inline std::size_t free_count(const GroundTruthGrid& world) {
  const auto cells = world.cells();
  return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), CellState::Free));
}

}  // namespace pathwise

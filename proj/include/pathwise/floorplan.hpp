#pragma once

// Worlds from line-segment floorplans, and a seeded generator of office-like
// floorplans (corridors lined with partitioned rooms).
//
// A metric point (mx, my) belongs to cell (round(mx * res), round(my * res)),
// clamped to the grid. Walls occupy every cell their segment touches
// (supercover, so diagonal runs have no gaps). Doors are carved afterwards
// over the same kind of run without its last cell, so a door of length L
// clears L * res cells.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pathwise/grid.hpp"
#include "pathwise/raycast.hpp"

namespace pathwise {

struct Segment2 {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;  // meters

  friend bool operator==(const Segment2&, const Segment2&) = default;
};

struct FloorplanSpec {
  double resolution = 10.0;  // cells per meter
  double width_m = 0.0;
  double height_m = 0.0;
  std::vector<Segment2> walls;
  std::vector<Segment2> doors;

  friend bool operator==(const FloorplanSpec&, const FloorplanSpec&) = default;
};

struct RasterizedFloorplan {
  GroundTruthGrid world;
  std::vector<std::string> warnings;
};

inline GridGeometry floorplan_geometry(const FloorplanSpec& spec) {
  if (!(spec.resolution > 0.0)) throw Error("floorplan: resolution must be > 0");
  if (!(spec.width_m > 0.0 && spec.height_m > 0.0)) throw Error("floorplan: extent must be positive");
  const int w = std::max(1, static_cast<int>(std::lround(spec.width_m * spec.resolution)));
  const int h = std::max(1, static_cast<int>(std::lround(spec.height_m * spec.resolution)));
  return GridGeometry(w, h, spec.resolution);
}

/// Cells touched by the segment between the centers of cells a and b, in order.
inline std::vector<Pose> supercover_cells(const GridGeometry& g, Pose a, Pose b) {
  std::vector<Pose> cells;
  if (a == b) {
    cells.push_back(a);
    return cells;
  }
  const double len = std::hypot(b.x - a.x, b.y - a.y);
  Direction d{(b.x - a.x) / len, (b.y - a.y) / len};
  // exact axis and diagonal directions keep corner ties deterministic
  if (a.x == b.x) d = {0.0, b.y > a.y ? 1.0 : -1.0};
  if (a.y == b.y) d = {b.x > a.x ? 1.0 : -1.0, 0.0};
  if (std::abs(b.x - a.x) == std::abs(b.y - a.y)) {
    const double m = std::sqrt(0.5);
    d = {std::copysign(m, b.x - a.x), std::copysign(m, b.y - a.y)};
  }
  trace_ray(g, a, d, len, [&](const CellVisit& v) {
    cells.push_back({v.x, v.y});
    return false;
  });
  if (cells.back() != b) cells.push_back(b);
  return cells;
}

inline RasterizedFloorplan rasterize_floorplan(const FloorplanSpec& spec) {
  const GridGeometry g = floorplan_geometry(spec);
  RasterizedFloorplan out{GroundTruthGrid(g, CellState::Free), {}};
  const double tol = 1e-9;
  auto to_cell = [&](double mx, double my) {
    return Pose{std::clamp(static_cast<int>(std::lround(mx * spec.resolution)), 0, g.width - 1),
                std::clamp(static_cast<int>(std::lround(my * spec.resolution)), 0, g.height - 1)};
  };
  auto check = [&](const Segment2& s, std::string_view what) {
    for (double x : {s.x1, s.x2})
      if (!(x >= -tol && x <= spec.width_m + tol)) throw Error("floorplan: " + std::string(what) + " outside extent");
    for (double y : {s.y1, s.y2})
      if (!(y >= -tol && y <= spec.height_m + tol)) throw Error("floorplan: " + std::string(what) + " outside extent");
  };
  for (const Segment2& s : spec.walls) {
    check(s, "wall");
    const Pose a = to_cell(s.x1, s.y1), b = to_cell(s.x2, s.y2);
    if (s.x1 == s.x2 && s.y1 == s.y2) {
      out.warnings.push_back("skipped zero-length wall at (" + std::to_string(s.x1) + ", " + std::to_string(s.y1) + ")");
      continue;
    }
    for (const Pose& c : supercover_cells(g, a, b)) out.world.set(c, CellState::Occupied);
  }
  for (const Segment2& s : spec.doors) {
    check(s, "door");
    const Pose a = to_cell(s.x1, s.y1), b = to_cell(s.x2, s.y2);
    if (a == b) {
      out.warnings.push_back("skipped zero-length door at (" + std::to_string(s.x1) + ", " + std::to_string(s.y1) + ")");
      continue;
    }
    auto cells = supercover_cells(g, a, b);
    cells.pop_back();
    for (const Pose& c : cells) out.world.set(c, CellState::Free);
  }
  close_border(out.world);
  return out;
}

// ---------------------------------------------------------------- JSON

inline nlohmann::json floorplan_to_json(const FloorplanSpec& spec) {
  auto segs = [](const std::vector<Segment2>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& s : v) a.push_back({s.x1, s.y1, s.x2, s.y2});
    return a;
  };
  return {{"resolution", spec.resolution},
          {"extent", {spec.width_m, spec.height_m}},
          {"walls", segs(spec.walls)},
          {"doors", segs(spec.doors)}};
}

inline FloorplanSpec floorplan_from_json(const nlohmann::json& j) {
  try {
    FloorplanSpec spec;
    spec.resolution = j.value("resolution", 10.0);
    const auto& extent = j.at("extent");
    if (!extent.is_array() || extent.size() != 2) throw Error("floorplan: extent must be [width, height]");
    spec.width_m = extent[0].get<double>();
    spec.height_m = extent[1].get<double>();
    auto read = [](const nlohmann::json& arr, std::vector<Segment2>& out) {
      for (const auto& s : arr) {
        if (!s.is_array() || s.size() != 4) throw Error("floorplan: segments must be [x1, y1, x2, y2]");
        out.push_back({s[0].get<double>(), s[1].get<double>(), s[2].get<double>(), s[3].get<double>()});
      }
    };
    if (j.contains("walls")) read(j.at("walls"), spec.walls);
    if (j.contains("doors")) read(j.at("doors"), spec.doors);
    floorplan_geometry(spec);  // validates resolution and extent
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("floorplan: ") + e.what());
  }
}

// ---------------------------------------------------------------- generator

enum class MapClass { Small, Medium, Large };

inline std::string_view map_class_name(MapClass c) {
  switch (c) {
    case MapClass::Small: return "small";
    case MapClass::Medium: return "medium";
    case MapClass::Large: return "large";
  }
  return "?";
}

inline MapClass parse_map_class(std::string_view s) {
  if (s == "small") return MapClass::Small;
  if (s == "medium") return MapClass::Medium;
  if (s == "large") return MapClass::Large;
  throw Error("unknown map class '" + std::string(s) + "' (small, medium, large)");
}

/// Building footprint per class, meters.
inline std::array<double, 2> map_class_extent(MapClass c) {
  switch (c) {
    case MapClass::Small: return {65.0, 85.0};
    case MapClass::Medium: return {60.0, 205.0};
    case MapClass::Large: return {88.0, 265.0};
  }
  return {0.0, 0.0};
}

/// Every Free cell reachable from every other one (4-connected).
inline bool free_space_connected(const GroundTruthGrid& world) {
  const GridGeometry& g = world.geometry();
  std::vector<std::uint8_t> seen(g.cell_count(), 0);
  std::size_t total = 0, start = g.cell_count();
  for (std::size_t i = 0; i < world.size(); ++i)
    if (world[i] == CellState::Free) {
      ++total;
      if (start == g.cell_count()) start = i;
    }
  if (total == 0) return false;
  std::vector<std::size_t> stack{start};
  seen[start] = 1;
  std::size_t reached = 0;
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    ++reached;
    const int x = static_cast<int>(i % static_cast<std::size_t>(g.width));
    const int y = static_cast<int>(i / static_cast<std::size_t>(g.width));
    const int nx[4] = {x + 1, x - 1, x, x};
    const int ny[4] = {y, y, y + 1, y - 1};
    for (int k = 0; k < 4; ++k) {
      if (!g.contains(nx[k], ny[k])) continue;
      const std::size_t j = g.index(nx[k], ny[k]);
      if (!seen[j] && world[j] == CellState::Free) {
        seen[j] = 1;
        stack.push_back(j);
      }
    }
  }
  return reached == total;
}

struct GeneratorParams {
  double resolution = 10.0;
  double corridor_width = 3.0;
  double cross_corridor_every = 60.0;  // meters along the long axis
  double min_room = 4.0;
  double max_room = 14.0;
  double door_width = 1.0;
  double corridor_door_chance = 0.5;
};

namespace detail {

struct Rect {
  double x0, y0, x1, y1;
  [[nodiscard]] double w() const { return x1 - x0; }
  [[nodiscard]] double h() const { return y1 - y0; }
};

class FloorplanBuilder {
 public:
  FloorplanBuilder(std::mt19937_64& rng, const GeneratorParams& p, FloorplanSpec& spec)
      : rng_(rng), p_(p), spec_(spec) {}

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
  bool chance(double c) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < c; }

  /// Snaps to the cell grid so walls and doors land on whole cells.
  [[nodiscard]] double snap(double v) const { return std::round(v * p_.resolution) / p_.resolution; }

  void wall(double x1, double y1, double x2, double y2) { spec_.walls.push_back({x1, y1, x2, y2}); }

  /// At least three cells wide: on coarse grids a narrower opening gives
  /// frontier clusters below the usual minimum size, and rooms behind it
  /// would never be visited.
  [[nodiscard]] double door_width() const { return std::max(p_.door_width, snap(3.0 / p_.resolution + 1e-9)); }

  /// Door placed somewhere on the segment, kept clear of the segment's ends.
  void door_on(double x1, double y1, double x2, double y2) {
    const double len = std::hypot(x2 - x1, y2 - y1);
    const double margin = 0.5;
    const double dw = door_width();
    if (len < dw + 2 * margin) return;
    const double s = snap(uniform(margin, len - dw - margin));
    const double ux = (x2 - x1) / len, uy = (y2 - y1) / len;
    spec_.doors.push_back({x1 + ux * s, y1 + uy * s, x1 + ux * (s + dw), y1 + uy * (s + dw)});
  }

  /// Recursively splits `r` into rooms; each split wall gets one door.
  /// Returns the leaf rooms.
  void partition(const Rect& r, std::vector<Rect>& leaves) {
    const bool split_w = r.w() > p_.max_room || (r.w() >= r.h() && r.w() > 2 * p_.min_room && chance(0.3));
    const bool split_h = r.h() > p_.max_room || (r.h() > r.w() && r.h() > 2 * p_.min_room && chance(0.3));
    if ((split_w || split_h) && std::max(r.w(), r.h()) >= 2 * p_.min_room) {
      const bool vertical = split_w && (!split_h || r.w() >= r.h());
      if (vertical && r.w() >= 2 * p_.min_room) {
        const double x = snap(uniform(r.x0 + p_.min_room, r.x1 - p_.min_room));
        wall(x, r.y0, x, r.y1);
        door_on(x, r.y0, x, r.y1);
        partition({r.x0, r.y0, x, r.y1}, leaves);
        partition({x, r.y0, r.x1, r.y1}, leaves);
        return;
      }
      if (!vertical && r.h() >= 2 * p_.min_room) {
        const double y = snap(uniform(r.y0 + p_.min_room, r.y1 - p_.min_room));
        wall(r.x0, y, r.x1, y);
        door_on(r.x0, y, r.x1, y);
        partition({r.x0, r.y0, r.x1, y}, leaves);
        partition({r.x0, y, r.x1, r.y1}, leaves);
        return;
      }
    }
    leaves.push_back(r);
  }

 private:
  std::mt19937_64& rng_;
  const GeneratorParams& p_;
  FloorplanSpec& spec_;
};

}  // namespace detail

/// One candidate layout; may be disconnected (the caller checks).
inline FloorplanSpec generate_floorplan_once(std::uint64_t seed, MapClass cls, const GeneratorParams& p) {
  std::mt19937_64 rng(seed);
  const auto [W, H] = map_class_extent(cls);
  FloorplanSpec spec;
  spec.resolution = p.resolution;
  spec.width_m = W;
  spec.height_m = H;
  detail::FloorplanBuilder b(rng, p, spec);

  // a spine corridor along the long (y) axis, with cross corridors
  const double cw = p.corridor_width;
  const double cx0 = b.snap(b.uniform(0.35 * W, 0.65 * W - cw));
  const double cx1 = b.snap(cx0 + cw);
  std::vector<double> cross;  // y of the lower edge of each cross corridor
  const int n_cross = static_cast<int>(H / p.cross_corridor_every);
  for (int k = 1; k <= n_cross; ++k) {
    const double y = b.snap(k * H / (n_cross + 1) + b.uniform(-5.0, 5.0));
    cross.push_back(y);
  }

  // blocks of rooms: left/right of the spine, between cross corridors
  std::vector<double> ys{0.0};
  for (double y : cross) {
    ys.push_back(y);
    ys.push_back(b.snap(y + cw));
  }
  ys.push_back(H);
  for (std::size_t k = 0; k + 1 < ys.size(); k += 2) {
    const double y0 = ys[k], y1 = ys[k + 1];
    for (int side = 0; side < 2; ++side) {
      const detail::Rect block = side == 0 ? detail::Rect{0.0, y0, cx0, y1} : detail::Rect{cx1, y0, W, y1};
      // block outline facing corridors
      const double xc = side == 0 ? cx0 : cx1;
      b.wall(xc, y0, xc, y1);
      if (y0 > 0.0) b.wall(block.x0, y0, block.x1, y0);
      if (y1 < H) b.wall(block.x0, y1, block.x1, y1);
      std::vector<detail::Rect> rooms;
      b.partition(block, rooms);
      bool any = false;
      for (std::size_t i = 0; i < rooms.size(); ++i) {
        const detail::Rect& r = rooms[i];
        const bool on_spine = side == 0 ? r.x1 == cx0 : r.x0 == cx1;
        const bool last = i + 1 == rooms.size();
        if (on_spine && (b.chance(p.corridor_door_chance) || (last && !any))) {
          b.door_on(xc, r.y0, xc, r.y1);
          any = true;
        } else if (!on_spine && last && !any) {
          // no room touched the spine (cannot happen with a full-height block, kept for safety)
          b.door_on(xc, y0, xc, y1);
          any = true;
        }
      }
    }
  }
  return spec;
}

/// Connected floorplan of the given class; retries with derived seeds up to
/// 100 times.
inline FloorplanSpec generate_floorplan(std::uint64_t seed, MapClass cls, const GeneratorParams& p = {}) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    FloorplanSpec spec = generate_floorplan_once(seed * 1000003ULL + static_cast<std::uint64_t>(attempt), cls, p);
    if (free_space_connected(rasterize_floorplan(spec).world)) return spec;
  }
  throw Error("floorplan generator: no connected layout after 100 attempts");
}

}  // namespace pathwise

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pathwise/raycast.hpp"
#include "pathwise/visibility.hpp"
#include "support.hpp"

using namespace pathwise;
using namespace testsupport;

namespace {

GroundTruthGrid empty_world(int w, int h) {
  GroundTruthGrid world(GridGeometry(w, h), CellState::Free);
  close_border(world);
  return world;
}

/// Square room with a closed 5x5 pillar room in the middle.
GroundTruthGrid pillar_world() {
  GroundTruthGrid world = empty_world(41, 41);
  for (int i = 17; i <= 23; ++i) {
    world.set(i, 17, CellState::Occupied);
    world.set(i, 23, CellState::Occupied);
    world.set(17, i, CellState::Occupied);
    world.set(23, i, CellState::Occupied);
  }
  return world;
}

std::vector<Pose> square_loop(int lo, int hi) {
  std::vector<Pose> path;
  for (int x = lo; x < hi; ++x) path.push_back({x, lo});
  for (int y = lo; y < hi; ++y) path.push_back({hi, y});
  for (int x = hi; x > lo; --x) path.push_back({x, hi});
  for (int y = hi; y >= lo; --y) path.push_back({lo, y});
  return path;
}

}  // namespace

// ---------------------------------------------------------------- raycasting

TEST(RaycastGroundTruth, EmptyInteriorReachesFullRange) {
  const auto world = empty_world(40, 40);
  const auto scan = raycast_ground_truth({20, 20}, 10.0, world, 360);
  ASSERT_EQ(scan.fan.vertices.size(), 360u);
  for (std::size_t i = 0; i < 360; ++i) {
    EXPECT_DOUBLE_EQ(scan.fan.distances[i], 10.0);
    EXPECT_NEAR(distance(scan.fan.vertices[i], Point2{20, 20}), 10.0, 1e-9);
    EXPECT_FALSE(scan.rays[i].blocked);
  }
}

TEST(RaycastGroundTruth, WallThreeEastStopsCardinalRay) {
  auto world = empty_world(20, 20);
  world.set(13, 10, CellState::Occupied);
  const auto scan = raycast_ground_truth({10, 10}, 8.0, world, 360);
  const RayTrace& east = scan.rays[0];
  ASSERT_TRUE(east.blocked);
  EXPECT_EQ(east.cells.back(), (Pose{13, 10}));
  // vertex sits on the far side of the wall cell so the cell center is inside
  EXPECT_DOUBLE_EQ(scan.fan.distances[0], 3.5);
}

TEST(RaycastGroundTruth, PoseInsideWallIsRejected) {
  auto world = empty_world(10, 10);
  world.set(5, 5, CellState::Occupied);
  EXPECT_THROW(raycast_ground_truth({5, 5}, 5.0, world, 16), Error);
  EXPECT_THROW(raycast_ground_truth({4, 4}, 5.0, world, 4), Error);
}

TEST(RaycastGroundTruth, MatchesSingleCellMarchOnRandomMaps) {
  std::mt19937_64 rng(7);
  int compared = 0;
  for (int trial = 0; trial < 5; ++trial) {
    const auto world = random_world(32, 32, 0.2, rng);
    const Pose pose = random_free(world, rng);
    const double range = 12.0;
    const auto scan = raycast_ground_truth(pose, range, world, 360);
    for (int i = 0; i < 360; ++i) {
      if (i % 45 == 0 && i % 90 != 0) continue;  // exact corner crossings: see the diagonal test
      const auto hit = march_first_hit(world, pose, ray_direction(i, 360), range);
      const RayTrace& ray = scan.rays[static_cast<std::size_t>(i)];
      if (hit) {
        // the march can only miss a hit beyond the range once the cell was entered before it
        ASSERT_TRUE(ray.blocked) << "ray " << i;
        EXPECT_EQ(ray.cells.back(), *hit) << "ray " << i;
        ++compared;
      } else {
        EXPECT_FALSE(ray.blocked && distance(Point2{double(pose.x), double(pose.y)},
                                             Point2{double(ray.cells.back().x), double(ray.cells.back().y)}) <
                                        range - 1.0)
            << "ray " << i;
      }
    }
  }
  EXPECT_GT(compared, 100);
}

TEST(RaycastGroundTruth, DiagonalRayStopsOnCornerTouchingCell) {
  // a diagonal ray touching the corner of a wall cell is blocked by it
  auto world = empty_world(20, 20);
  world.set(11, 10, CellState::Occupied);
  const auto scan = raycast_ground_truth({10, 10}, 8.0, world, 360);
  const RayTrace& diag = scan.rays[45];
  ASSERT_TRUE(diag.blocked);
  EXPECT_EQ(diag.cells.back(), (Pose{11, 10}));
}

TEST(RaycastProbabilistic, AllZeroMapReachesFullRange) {
  const PredictedGrid pred(GridGeometry(40, 40), 0.0);
  const auto fan = raycast_probabilistic({20, 20}, 10.0, pred, 0.8, 360);
  for (double d : fan.distances) EXPECT_DOUBLE_EQ(d, 10.0);
}

TEST(RaycastProbabilistic, UnitCellStopsRay) {
  PredictedGrid pred(GridGeometry(20, 20), 0.0);
  pred.set(13, 10, 1.0);
  const auto fan = raycast_probabilistic({10, 10}, 8.0, pred, 0.8, 360);
  EXPECT_DOUBLE_EQ(fan.distances[0], 3.5);
}

TEST(RaycastProbabilistic, RunningSumStopsOnThirdCell) {
  // 0.3 + 0.3 = 0.6 < 0.8, 0.9 >= 0.8: the ray ends in the third cell entered
  PredictedGrid pred(GridGeometry(20, 20), 0.0);
  for (int x = 0; x < 20; ++x) pred.set(x, 10, 0.3);
  const auto fan = raycast_probabilistic({5, 10}, 10.0, pred, 0.8, 360);
  EXPECT_DOUBLE_EQ(fan.distances[0], 3.5);
  EXPECT_DOUBLE_EQ(fan.distances[180], 3.5);
}

TEST(RaycastProbabilistic, RejectsBadEpsilon) {
  const PredictedGrid pred(GridGeometry(10, 10), 0.0);
  EXPECT_THROW(raycast_probabilistic({5, 5}, 3.0, pred, 0.0, 16), Error);
  EXPECT_THROW(raycast_probabilistic({5, 5}, 3.0, pred, 1.5, 16), Error);
}

TEST(RaycastProbabilistic, MonotoneInEpsilon) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int rays = 0;
  while (rays < 1000) {
    PredictedGrid pred(GridGeometry(30, 30), 0.0);
    for (std::size_t i = 0; i < pred.size(); ++i) pred[i] = u(rng) < 0.7 ? 0.0 : u(rng);
    const Pose pose{1 + static_cast<int>(u(rng) * 28), 1 + static_cast<int>(u(rng) * 28)};
    const double e1 = 0.05 + 0.95 * u(rng);
    const double e2 = e1 + (1.0 - e1) * u(rng);
    const auto f1 = raycast_probabilistic(pose, 15.0, pred, e1, 100);
    const auto f2 = raycast_probabilistic(pose, 15.0, pred, e2, 100);
    for (std::size_t i = 0; i < 100; ++i) EXPECT_LE(f1.distances[i], f2.distances[i]);
    rays += 100;
  }
}

TEST(RaycastProbabilistic, BinaryMapMatchesDeterministicStops) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const auto world = random_world(32, 32, 0.15, rng);
    const auto pred = binary_prediction(world);
    const Pose pose = random_free(world, rng);
    const auto gt = raycast_ground_truth(pose, 14.0, world, 360);
    for (double eps : {0.1, 0.5, 0.8, 1.0}) {
      const auto fan = raycast_probabilistic(pose, 14.0, pred, eps, 360);
      for (std::size_t i = 0; i < 360; ++i) EXPECT_DOUBLE_EQ(fan.distances[i], gt.fan.distances[i]);
    }
  }
}

TEST(RaycastObserved, UnknownIsTransparent) {
  ObservedGrid obs(GridGeometry(20, 20), CellState::Unknown);
  obs.set(10, 10, CellState::Free);
  obs.set(15, 10, CellState::Occupied);
  const auto fan = raycast_observed({10, 10}, 8.0, obs, 360);
  EXPECT_DOUBLE_EQ(fan.distances[0], 5.5);
  EXPECT_DOUBLE_EQ(fan.distances[180], 8.0);
}

// ---------------------------------------------------------------- polygons

TEST(DrawPolygon, ConnectsVerticesInOrder) {
  RayFan fan;
  fan.vertices = {{3, 0}, {0, 3}, {-3, 0}, {0, -3}};
  const auto poly = draw_polygon(fan);
  ASSERT_EQ(poly.outers.size(), 1u);
  EXPECT_TRUE(poly.holes.empty());
  const Ring expect{{3, 0}, {0, 3}, {-3, 0}, {0, -3}, {3, 0}};
  EXPECT_EQ(poly.outers[0], expect);
}

TEST(DrawPolygon, EmptyMapGivesRegularPolygon) {
  const auto world = empty_world(40, 40);
  const auto poly = draw_polygon(raycast_ground_truth({20, 20}, 10.0, world, 36).fan);
  ASSERT_EQ(poly.outers[0].size(), 37u);
  for (const Point2& p : poly.outers[0]) EXPECT_NEAR(distance(p, {20, 20}), 10.0, 1e-9);
}

TEST(DrawPolygon, OneShortenedRay) {
  auto world = empty_world(40, 40);
  world.set(25, 20, CellState::Occupied);
  const auto fan = raycast_ground_truth({20, 20}, 10.0, world, 36).fan;
  const auto poly = draw_polygon(fan);
  int short_vertices = 0;
  for (std::size_t i = 0; i + 1 < poly.outers[0].size(); ++i)
    if (distance(poly.outers[0][i], {20, 20}) < 9.0) ++short_vertices;
  EXPECT_EQ(short_vertices, 1);
}

TEST(DrawPolygon, DegenerateFanThrows) {
  RayFan fan;
  fan.vertices = {{1, 1}, {1, 1}, {2, 2}};
  EXPECT_THROW(draw_polygon(fan), DegeneratePolygon);
}

TEST(Rasterize, SquareCoversFiveByFiveCenters) {
  const GridGeometry g(20, 20);
  const auto poly = rect(4.5, 4.5, 9.5, 9.5);
  const auto mask = rasterize_mask(poly, g);
  EXPECT_EQ(mask.count(), 25u);
  EXPECT_EQ(mask, pip_mask(poly, g));
}

TEST(Rasterize, ConcentricHoleIsExcluded) {
  const GridGeometry g(20, 20);
  VisPolygon poly = rect(2.5, 2.5, 9.5, 9.5);
  Ring hole = rect_ring(3.5, 3.5, 8.5, 8.5);
  std::reverse(hole.begin(), hole.end());
  poly.holes.push_back(hole);
  const auto mask = rasterize_mask(poly, g);
  EXPECT_EQ(mask.count(), 49u - 25u);
  EXPECT_FALSE(mask.test(6, 6));
  EXPECT_TRUE(mask.test(3, 3));
  EXPECT_EQ(mask, pip_mask(poly, g));
}

TEST(Rasterize, ZeroAreaAndOffGridGiveEmptyMask) {
  const GridGeometry g(10, 10);
  VisPolygon flat;
  flat.outers.push_back({{1, 1}, {5, 1}, {8, 1}, {1, 1}});
  EXPECT_EQ(rasterize_mask(flat, g).count(), 0u);
  EXPECT_EQ(rasterize_mask(rect(20, 20, 30, 30), g).count(), 0u);
}

TEST(Rasterize, RandomStarPolygonsMatchPointInPolygon) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> r(1.0, 14.0);
  const GridGeometry g(40, 40);
  for (int trial = 0; trial < 50; ++trial) {
    RayFan fan;
    const int n = 40;
    for (int i = 0; i < n; ++i) {
      const Direction d = ray_direction(i, n);
      const double len = r(rng);
      fan.vertices.push_back({20.3 + d.dx * len, 19.7 + d.dy * len});
    }
    const auto poly = draw_polygon(fan);
    EXPECT_EQ(rasterize_mask(poly, g), pip_mask(poly, g));
  }
}

TEST(PointMask, EmptyMapIsDisc) {
  const PredictedGrid pred(GridGeometry(41, 41), 0.0);
  const RaySettings s{10.0, 360, 0.8};
  const auto mask = point_visibility_mask(Pose{20, 20}, pred, s);
  mask.for_each([&](int x, int y) { EXPECT_LE(std::hypot(x - 20, y - 20), 10.0 + 1e-9); });
  for (int y = 0; y < 41; ++y)
    for (int x = 0; x < 41; ++x)
      if (std::hypot(x - 20, y - 20) < 9.9) {
        EXPECT_TRUE(mask.test(x, y));
      }
}

TEST(PointMask, ClosedRoomGivesRoomInterior) {
  GroundTruthGrid world(GridGeometry(30, 30), CellState::Free);
  close_border(world);
  // 7x7 interior room with walls at 9 and 17
  for (int i = 9; i <= 17; ++i) {
    world.set(i, 9, CellState::Occupied);
    world.set(i, 17, CellState::Occupied);
    world.set(9, i, CellState::Occupied);
    world.set(17, i, CellState::Occupied);
  }
  const auto pred = binary_prediction(world);
  const auto mask = point_visibility_mask(Pose{13, 13}, pred, RaySettings{20.0, 360, 0.8});
  // interior cells plus the walls that stop the rays (the stop cell is part of the mask)
  for (int y = 0; y < 30; ++y)
    for (int x = 0; x < 30; ++x) {
      const bool interior = x >= 10 && x <= 16 && y >= 10 && y <= 16;
      const bool outside = x < 9 || x > 17 || y < 9 || y > 17;
      if (interior) {
        EXPECT_TRUE(mask.test(x, y)) << x << "," << y;
      }
      if (outside) {
        EXPECT_FALSE(mask.test(x, y)) << x << "," << y;
      }
    }
}

TEST(PointMask, WallOccludesCellsBehindIt) {
  GroundTruthGrid world(GridGeometry(40, 40), CellState::Free);
  close_border(world);
  for (int y = 10; y <= 30; ++y) world.set(22, y, CellState::Occupied);
  const auto pred = binary_prediction(world);
  const auto mask = point_visibility_mask(Pose{20, 20}, pred, RaySettings{15.0, 360, 0.8});
  for (int y = 15; y <= 25; ++y)
    for (int x = 23; x < 35; ++x) EXPECT_FALSE(mask.test(x, y)) << x << "," << y;
  EXPECT_TRUE(mask.test(21, 20));
  EXPECT_TRUE(mask.test(22, 20));
}

TEST(PointMask, ObservedVariantSeesThroughUnknown) {
  ObservedGrid obs(GridGeometry(40, 40), CellState::Unknown);
  const auto mask = point_visibility_mask(Pose{20, 20}, obs, RaySettings{10.0, 360, 0.8});
  EXPECT_TRUE(mask.test(29, 20));
}

// ---------------------------------------------------------------- union and holes

TEST(PolygonUnion, SinglePolygonIsIdentity) {
  const GridGeometry g(30, 30);
  const auto poly = rect(3.2, 4.7, 17.1, 12.9);
  const auto u = polygon_union(std::vector<VisPolygon>{poly});
  ASSERT_EQ(u.outers.size(), 1u);
  EXPECT_TRUE(u.holes.empty());
  EXPECT_EQ(rasterize_mask(u, g), rasterize_mask(poly, g));
  EXPECT_NEAR(signed_area2(u.outers[0]), signed_area2(poly.outers[0]), 1e-4);
}

TEST(PolygonUnion, DisjointSquaresStaySeparate) {
  const GridGeometry g(30, 30);
  const std::vector<VisPolygon> polys{rect(1.5, 1.5, 6.5, 6.5), rect(10.5, 10.5, 20.5, 14.5)};
  const auto u = polygon_union(polys);
  EXPECT_EQ(u.outers.size(), 2u);
  auto expect = rasterize_mask(polys[0], g);
  expect |= rasterize_mask(polys[1], g);
  EXPECT_EQ(rasterize_mask(u, g), expect);
}

TEST(PolygonUnion, OverlappingSquaresMerge) {
  const GridGeometry g(30, 30);
  const std::vector<VisPolygon> polys{rect(1.5, 1.5, 10.5, 10.5), rect(5.5, 5.5, 20.5, 14.5)};
  const auto u = polygon_union(polys);
  EXPECT_EQ(u.outers.size(), 1u);
  EXPECT_TRUE(u.holes.empty());
  auto expect = rasterize_mask(polys[0], g);
  expect |= rasterize_mask(polys[1], g);
  EXPECT_EQ(rasterize_mask(u, g), expect);
}

TEST(PolygonUnion, SharedEdgesAndCollinearOverlap) {
  const GridGeometry g(30, 30);
  const std::vector<VisPolygon> polys{rect(2, 2, 8, 8), rect(8, 2, 14, 8), rect(5, 2, 11, 5)};
  const auto u = polygon_union(polys);
  ASSERT_EQ(u.outers.size(), 1u);
  EXPECT_TRUE(u.holes.empty());
  EXPECT_NEAR(signed_area2(u.outers[0]) / 2.0, 72.0, 1e-6);
}

TEST(PolygonUnion, RandomFansMatchRasterOr) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> r(1.0, 9.0);
  std::uniform_real_distribution<double> c(8.0, 32.0);
  const GridGeometry g(40, 40);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<VisPolygon> polys;
    for (int k = 0; k < 6; ++k) {
      RayFan fan;
      const double cx = c(rng), cy = c(rng);
      for (int i = 0; i < 60; ++i) {
        const Direction d = ray_direction(i, 60);
        const double len = r(rng);
        fan.vertices.push_back({cx + d.dx * len, cy + d.dy * len});
      }
      polys.push_back(draw_polygon(fan));
    }
    const auto u = polygon_union(polys);
    VisibilityMask expect(g);
    for (const auto& p : polys) expect |= rasterize_mask(p, g);
    const auto rep = compare_masks(rasterize_mask(u, g), expect, polys, u);
    EXPECT_TRUE(rep.ok()) << "diff " << rep.diff << " off-boundary " << rep.off_boundary;
  }
}

TEST(ExtractHoles, ConvexPolygonHasNone) {
  const std::vector<VisPolygon> polys{rect(2, 2, 9, 9)};
  const auto u = polygon_union(polys);
  EXPECT_TRUE(extract_holes(polys, u).holes.empty());
}

TEST(ExtractHoles, FrameOfRectanglesTrapsCenter) {
  const GridGeometry g(30, 30);
  const std::vector<VisPolygon> polys{rect(2.5, 2.5, 20.5, 6.5), rect(2.5, 16.5, 20.5, 20.5),
                                      rect(2.5, 2.5, 6.5, 20.5), rect(16.5, 2.5, 20.5, 20.5)};
  const auto u = polygon_union(polys);
  const auto split = extract_holes(polys, u);
  ASSERT_FALSE(split.holes.empty());
  // raster oracle: cells inside the frame's hull but in no input raster
  VisibilityMask covered(g);
  for (const auto& p : polys) covered |= rasterize_mask(p, g);
  const auto hull = rasterize_mask(rect(2.5, 2.5, 20.5, 20.5), g);
  VisibilityMask expect(g);
  for (int y = 0; y < 30; ++y)
    for (int x = 0; x < 30; ++x)
      if (hull.test(x, y) && !covered.test(x, y)) expect.set(x, y);
  EXPECT_EQ(rasterize_mask(split.holes, g), expect);
  EXPECT_EQ(expect.count(), 100u);
}

TEST(ExtractHoles, OpenSpacePathHasNone) {
  const PredictedGrid pred(GridGeometry(60, 40), 0.0);
  std::vector<VisPolygon> polys;
  for (int x = 10; x < 50; x += 3)
    polys.push_back(draw_polygon(raycast_probabilistic({x, 20}, 8.0, pred, 0.8, 360)));
  const auto u = polygon_union(polys);
  EXPECT_EQ(u.outers.size(), 1u);
  EXPECT_TRUE(extract_holes(polys, u).holes.empty());
}

// ---------------------------------------------------------------- path masks

TEST(PathMask, SinglePoseEqualsPointMask) {
  std::mt19937_64 rng(1);
  const auto world = random_world(40, 40, 0.1, rng);
  const auto pred = binary_prediction(world);
  const Pose p = random_free(world, rng);
  const RaySettings s{12.0, 360, 0.8};
  const std::vector<Pose> path{p};
  const auto pt = point_visibility_mask(p, pred, s);
  const auto res = path_visibility_mask_detailed(std::span<const Pose>(path), pred, s);
  const auto rep = compare_masks(res.mask, pt, res.polygons, res.merged);
  EXPECT_TRUE(rep.ok()) << rep.diff;
  EXPECT_EQ(path_visibility_mask_oracle(std::span<const Pose>(path), pred, s), pt);
}

TEST(PathMask, StraightPathInEmptyMap) {
  const PredictedGrid pred(GridGeometry(80, 50), 0.0);
  const RaySettings s{12.0, 360, 0.8};
  std::vector<Pose> path;
  for (int x = 30; x < 50; ++x) path.push_back({x, 25});
  const auto oracle = path_visibility_mask_oracle(std::span<const Pose>(path), pred, s);
  const auto res = path_visibility_mask_detailed(std::span<const Pose>(path), pred, s);
  const auto rep = compare_masks(res.mask, oracle, res.polygons, res.merged);
  EXPECT_TRUE(rep.ok()) << rep.diff << " / " << rep.allowed;
}

TEST(PathMask, DuplicatePosesAreIdempotent) {
  const PredictedGrid pred(GridGeometry(30, 30), 0.0);
  const RaySettings s{8.0, 90, 0.8};
  const std::vector<Pose> one{{15, 15}};
  const std::vector<Pose> two{{15, 15}, {15, 15}};
  EXPECT_EQ(path_visibility_mask_oracle(std::span<const Pose>(one), pred, s),
            path_visibility_mask_oracle(std::span<const Pose>(two), pred, s));
}

TEST(PathMask, LoopAroundPillarExcludesTrappedRoom) {
  const auto world = pillar_world();
  const auto pred = binary_prediction(world);
  const RaySettings s{20.0, 360, 0.8};
  const auto path = square_loop(10, 30);
  const std::span<const Pose> ps(path);
  const auto oracle = path_visibility_mask_oracle(ps, pred, s, 2);
  const auto res = path_visibility_mask_detailed(ps, pred, s, PathMaskOptions{2, true});
  for (int y = 18; y <= 22; ++y)
    for (int x = 18; x <= 22; ++x) {
      EXPECT_FALSE(oracle.test(x, y));
      EXPECT_FALSE(res.mask.test(x, y)) << x << "," << y;
    }
  EXPECT_FALSE(res.holes.empty());
  const auto rep = compare_masks(res.mask, oracle, res.polygons, res.merged);
  EXPECT_TRUE(rep.ok()) << rep.diff << " / " << rep.allowed << " off " << rep.off_boundary;

  // without the hole step the trapped room leaks into the mask
  const auto leaky = path_visibility_mask(ps, pred, s, PathMaskOptions{2, false});
  EXPECT_TRUE(leaky.test(20, 20));
  EXPECT_FALSE(compare_masks(leaky, oracle, res.polygons, res.merged).ok());
}

TEST(PathMask, EmptyPathThrows) {
  const PredictedGrid pred(GridGeometry(10, 10), 0.0);
  const std::vector<Pose> none;
  EXPECT_THROW(path_visibility_mask(std::span<const Pose>(none), pred, RaySettings{}), Error);
  EXPECT_THROW(path_visibility_mask_oracle(std::span<const Pose>(none), pred, RaySettings{}), Error);
}

TEST(PathMask, RandomWorldsMatchOracle) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const RaySettings s{16.0, 360, 0.8};
  for (int trial = 0; trial < 20; ++trial) {
    const auto world = random_world(64, 64, 0.08, rng);
    PredictedGrid pred = binary_prediction(world);
    for (std::size_t i = 0; i < pred.size(); ++i)
      if (pred[i] == 0.0 && u(rng) < 0.1) pred[i] = 0.3;
    const auto path = random_walk(world, random_free(world, rng), 50, rng);
    const std::span<const Pose> ps(path);
    const auto oracle = path_visibility_mask_oracle(ps, pred, s, 3);
    const auto res = path_visibility_mask_detailed(ps, pred, s, PathMaskOptions{3, true});
    const auto rep = compare_masks(res.mask, oracle, res.polygons, res.merged);
    EXPECT_TRUE(rep.ok()) << "trial " << trial << " diff " << rep.diff << " / " << rep.allowed << " off "
                          << rep.off_boundary;
    // containment of every sampled pose's mask, under the same tolerance
    for (std::size_t k = 0; k < res.polygons.size(); k += 5) {
      const auto pm = rasterize_mask(res.polygons[k], world.geometry());
      std::size_t missing = 0;
      pm.for_each([&](int x, int y) { missing += res.mask.test(x, y) ? 0 : 1; });
      EXPECT_LE(missing, rep.allowed);
    }
  }
}

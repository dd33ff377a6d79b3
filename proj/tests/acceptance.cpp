// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
// fails.
//
//   acceptance            all criteria
//   acceptance 3 7 8      only the listed ones
//   acceptance --scratch DIR   where run outputs go (default: a temp dir)

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "pathwise/bench.hpp"
#include "pathwise/experiment.hpp"
#include "pathwise/oracle_check.hpp"
#include "support.hpp"

using namespace pathwise;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

fs::path g_scratch;

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------- 1, 2

Outcome geometry_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  OracleCheckOptions opt;
  opt.include_pillar_loop = false;  // 100 random worlds; the loop case is criterion 2
  const auto r = run_oracle_check(1, 100, opt);
  const double s = seconds_since(t0);
  return {r.failures == 0 && s < 60.0,
          fmt("%d worlds, %d failures, max symmetric difference %zu cells, %.1f s", r.trials, r.failures, r.max_diff, s)};
}

Outcome hole_correctness() {
  const PillarLoopCase c = pillar_loop_case();
  auto trapped = [](const VisibilityMask& m) {
    std::size_t n = 0;
    for (int y = 18; y <= 22; ++y)
      for (int x = 18; x <= 22; ++x) n += m.test(x, y);
    return n;
  };
  const auto with = run_oracle_trial(binary_prediction(c.world), c.path, c.rays, true);
  const auto without = run_oracle_trial(binary_prediction(c.world), c.path, c.rays, false);
  const bool ok = trapped(with.optimized) == 0 && trapped(with.oracle) == 0 && with.report.ok() &&
                  trapped(without.optimized) > 0 && !without.report.ok();
  return {ok, fmt("trapped cells in mask: %zu with hole removal, %zu without (mutant %s)", trapped(with.optimized),
                  trapped(without.optimized), without.report.ok() ? "survives" : "caught")};
}

// ---------------------------------------------------------------- 3

Outcome probabilistic_raycast() {
  std::vector<std::string> bad;
  {
    const PredictedGrid pred(GridGeometry(40, 40), 0.0);
    const auto fan = raycast_probabilistic({20, 20}, 10.0, pred, 0.8, 360);
    for (double d : fan.distances)
      if (d != 10.0) {
        bad.push_back("all-zero map");
        break;
      }
  }
  {
    PredictedGrid pred(GridGeometry(20, 20), 0.0);
    pred.set(13, 10, 1.0);
    if (raycast_probabilistic({10, 10}, 8.0, pred, 0.8, 360).distances[0] != 3.5) bad.push_back("unit wall");
  }
  {
    PredictedGrid pred(GridGeometry(20, 20), 0.0);
    for (int x = 0; x < 20; ++x) pred.set(x, 10, 0.3);
    const auto fan = raycast_probabilistic({5, 10}, 10.0, pred, 0.8, 360);
    if (fan.distances[0] != 3.5 || fan.distances[180] != 3.5) bad.push_back("0.3 per cell");
  }
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int rays = 0, violations = 0;
  while (rays < 1000) {
    PredictedGrid pred(GridGeometry(30, 30), 0.0);
    for (std::size_t i = 0; i < pred.size(); ++i) pred[i] = u(rng) < 0.7 ? 0.0 : u(rng);
    const Pose pose{1 + static_cast<int>(u(rng) * 28), 1 + static_cast<int>(u(rng) * 28)};
    const double e1 = 0.05 + 0.95 * u(rng);
    const double e2 = e1 + (1.0 - e1) * u(rng);
    const auto f1 = raycast_probabilistic(pose, 15.0, pred, e1, 100);
    const auto f2 = raycast_probabilistic(pose, 15.0, pred, e2, 100);
    for (std::size_t i = 0; i < 100; ++i) violations += f1.distances[i] > f2.distances[i];
    rays += 100;
  }
  if (violations) bad.push_back(std::to_string(violations) + " epsilon-monotonicity violations");
  std::string detail = "3 unit cases, " + std::to_string(rays) + " random rays";
  for (const auto& b : bad) detail += "; failed: " + b;
  return {bad.empty(), detail};
}

// ---------------------------------------------------------------- 4

Outcome performance() {
  GeneratorParams gp;
  gp.resolution = 10.0;
  const GroundTruthGrid world = rasterize_floorplan(generate_floorplan(1, MapClass::Large, gp)).world;
  const auto cells = free_cells(world);
  const Pose start = cells[cells.size() / 2];
  const auto path = long_walk(world, start, 200);
  const RaySettings rays{200.0, 360, 0.8};
  const auto mb = bench_path_masks(binary_prediction(world), std::span<const Pose>(path), rays, 3);
  const auto sc = make_selection_scenario(world, start, 300.0, 3, 1);
  const auto sb = bench_selection(sc, PlannerConfig{rays, 4}, 8, 3);
  const bool ok = world.width() == 880 && world.height() == 2650 && mb.samples == 200 && mb.speedup() >= 2.0 &&
                  sb.reduction() >= 0.5 && sb.same_choice;
  return {ok, fmt("%dx%d map, %zu poses: union %.2fx faster than per-pose fills; %zu frontiers, 8 workers cut "
                  "selection time by %.1f%% (%u hardware threads)",
                  world.width(), world.height(), mb.samples, mb.speedup(), sb.frontiers, 100.0 * sb.reduction(),
                  std::thread::hardware_concurrency())};
}

// ---------------------------------------------------------------- 5, 6

// The comparison suite: 10 generated medium maps at 2 cells/m, one sampled
// start each, PIPE, Nearest and UPEN with the structural predictor.
struct Suite {
  bool ran = false;
  BatchResult result;
  double seconds = 0.0;
};

Suite g_suite;

const BatchResult& suite() {
  if (g_suite.ran) return g_suite.result;
  nlohmann::json worlds = nlohmann::json::array();
  for (int s = 1; s <= 10; ++s) worlds.push_back({{"generate", {{"class", "medium"}, {"seed", s}, {"resolution", 2}}}});
  const nlohmann::json j = {{"seed", 11},
                            {"worlds", worlds},
                            {"planners", {"pipe", "nearest", "upen"}},
                            {"sim", {{"range", 40}, {"budget", 8000}, {"stride", 4}}},
                            {"starts", {{"sample", 1}}},
                            {"workers", static_cast<int>(std::max(1u, std::thread::hardware_concurrency()))},
                            {"output", (g_scratch / "suite").string()}};
  const auto t0 = std::chrono::steady_clock::now();
  g_suite.result = cmd_batch(config_from_json(j));
  g_suite.seconds = seconds_since(t0);
  g_suite.ran = true;
  return g_suite.result;
}

const TableCell& cell(const BatchResult& b, const std::string& planner) {
  for (const auto& c : b.table)
    if (c.planner == planner) return c;
  throw Error("no table cell for " + planner);
}

double fail_fraction(const Aggregate& a) { return a.total ? static_cast<double>(a.failed) / a.total : 1.0; }

Outcome efficacy() {
  const auto& b = suite();
  const auto &pipe = cell(b, "pipe"), &near = cell(b, "nearest");
  const bool ok = !b.any_failed() && pipe.t90.total >= 10 && pipe.t90.mean < near.t90.mean &&
                  fail_fraction(pipe.t90) <= fail_fraction(near.t90) && g_suite.seconds <= 1800.0;
  return {ok, fmt("mean t90 pipe %.1f vs nearest %.1f; failure rate %.0f%% vs %.0f%%; %zu maps, %.0f s",
                  pipe.t90.mean, near.t90.mean, 100.0 * fail_fraction(pipe.t90), 100.0 * fail_fraction(near.t90),
                  pipe.t90.total, g_suite.seconds)};
}

Outcome auc_direction() {
  const auto& b = suite();
  const auto &pipe = cell(b, "pipe"), &near = cell(b, "nearest"), &upen = cell(b, "upen");
  const bool ok = !b.any_failed() && pipe.auc.mean >= near.auc.mean && pipe.auc.mean >= upen.auc.mean;
  return {ok, fmt("mean AUC pipe %.1f, nearest %.1f, upen %.1f", pipe.auc.mean, near.auc.mean, upen.auc.mean)};
}

// ---------------------------------------------------------------- 7

Outcome astar_optimality() {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> size(2, 20);
  std::uniform_real_distribution<double> dens(0.0, 0.4);
  int grids = 0, mismatches = 0, reachable = 0;
  while (grids < 200) {
    const int w = size(rng), h = size(rng);
    ObservedGrid o(GridGeometry(w, h), CellState::Free);
    const double d = dens(rng);
    std::bernoulli_distribution wall(d);
    for (std::size_t i = 0; i < o.size(); ++i)
      if (wall(rng)) o[i] = CellState::Occupied;
    std::vector<Pose> free;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (o.at(x, y) == CellState::Free) free.push_back({x, y});
    if (free.empty()) continue;
    ++grids;
    std::uniform_int_distribution<std::size_t> pick(0, free.size() - 1);
    for (int q = 0; q < 5; ++q) {
      const Pose a = free[pick(rng)], b = free[pick(rng)];
      const auto path = astar(a, b, o);
      const auto oracle = testsupport::ucs_cost(a, b, o);
      if (path.has_value() != oracle.has_value() || (path && !(path->cost == *oracle))) ++mismatches;
      reachable += oracle.has_value();
    }
  }
  return {mismatches == 0, fmt("%d grids, %d queries (%d reachable), %d cost mismatches", grids, grids * 5, reachable,
                               mismatches)};
}

// ---------------------------------------------------------------- 8

Outcome metrics_suite() {
  std::vector<std::string> bad;
  auto check = [&](bool c, const char* what) {
    if (!c) bad.push_back(what);
  };
  {
    const GridGeometry g(30, 30);
    VisibilityMask a(g);
    for (int i = 3; i < 20; ++i) a.set(i, 2 * (i % 7) + 3);
    check(buffered_iou(a, a, 2) == 1.0, "identical -> 1.0");
  }
  {
    const GridGeometry g(40, 10);
    VisibilityMask a(g), b(g);
    for (int y = 0; y < 10; ++y) {
      a.set(2, y);
      b.set(30, y);
    }
    check(buffered_iou(a, b, 2) == 0.0, "disjoint -> 0.0");
  }
  {
    const GridGeometry g(200, 12);
    VisibilityMask pred(g), truth(g);
    for (int x = 0; x < 75; ++x) pred.set(x, 2);
    for (int x = 0; x < 50; ++x) truth.set(x, 2);
    for (int x = 100; x < 125; ++x) truth.set(x, 9);
    check(buffered_iou(pred, truth, 0) == 0.5, "50/25/25 -> 0.5");
  }
  {
    std::mt19937_64 rng(8);
    std::bernoulli_distribution on(0.1);
    for (int trial = 0; trial < 50; ++trial) {
      const GridGeometry g(25, 25);
      VisibilityMask a(g), b(g);
      for (int y = 0; y < 25; ++y)
        for (int x = 0; x < 25; ++x) {
          if (on(rng)) a.set(x, y);
          if (on(rng)) b.set(x, y);
        }
      double prev = -1.0;
      for (int r = 0; r <= 5; ++r) {
        const double v = buffered_iou(a, b, r);
        if (v < prev) {
          bad.push_back("r-monotonicity");
          trial = 50;
          break;
        }
        prev = v;
      }
    }
  }
  const std::vector<IouSample> tri{{0, 0.0}, {100, 1.0}};
  check(auc(tri, 100) == 50.0, "triangle AUC = 50");
  const std::vector<IouSample> s{{0, 0.1}, {100, 0.85}, {200, 0.95}};
  check(time_to_threshold(s, 0.90, 1000) == 150, "interpolated t90 = 150");
  std::string detail = "6 fixture groups";
  for (const auto& b : bad) detail += "; failed: " + b;
  return {bad.empty(), detail};
}

// ---------------------------------------------------------------- 9

nlohmann::json determinism_config(const fs::path& out, int workers) {
  return {{"seed", 21},
          {"worlds",
           {{{"generate", {{"class", "small"}, {"seed", 2}, {"resolution", 2}}}},
            {{"generate", {{"class", "medium"}, {"seed", 3}, {"resolution", 1}}}}}},
          {"planners", {"pipe", "nearest", "upen"}},
          {"sim", {{"range", 30}, {"budget", 600}, {"stride", 4}}},
          {"starts", {{"sample", 2}}},
          {"workers", workers},
          {"output", out.string()}};
}

Outcome determinism() {
  std::vector<std::string> bad;
  const fs::path r1 = g_scratch / "det_run1", r2 = g_scratch / "det_run2";
  cmd_run(config_from_json(determinism_config(r1, 1)));
  cmd_run(config_from_json(determinism_config(r2, 1)));
  std::size_t run_files = 0;
  for (const auto& e : fs::directory_iterator(r1)) {
    ++run_files;
    if (slurp(e.path()) != slurp(r2 / e.path().filename())) bad.push_back("run " + e.path().filename().string());
  }
  const fs::path b1 = g_scratch / "det_batch1", b8 = g_scratch / "det_batch8";
  const auto one = cmd_batch(config_from_json(determinism_config(b1, 1)));
  const auto eight = cmd_batch(config_from_json(determinism_config(b8, 8)));
  if (one.any_failed() || eight.any_failed()) bad.push_back("batch runs failed");
  for (const char* f : {"tables.txt", "table_auc.csv", "table_threshold.csv", "batch.json"})
    if (slurp(b1 / f) != slurp(b8 / f)) bad.push_back(std::string("batch ") + f);
  for (const auto& o : one.outcomes)
    if (slurp(b1 / (o.id + ".csv")) != slurp(b8 / (o.id + ".csv"))) bad.push_back("batch " + o.id);
  std::string detail = fmt("run: %zu files compared; batch: %zu runs, 1 vs 8 workers", run_files, one.outcomes.size());
  for (const auto& b : bad) detail += "; differs: " + b;
  return {bad.empty() && run_files == 4, detail};
}

// ---------------------------------------------------------------- 10

Outcome invariants() {
  std::size_t steps = 0, violations = 0, checks = 0;
  std::string first;
  auto flag = [&](bool ok, const std::string& what) {
    if (ok) return;
    if (violations++ == 0) first = what;
  };
  GeneratorParams gp;
  gp.resolution = 2.0;
  for (MapClass cls : {MapClass::Small, MapClass::Medium})
    for (std::uint64_t seed : {1, 2, 3}) {
      const auto world = rasterize_floorplan(generate_floorplan(seed, cls, gp)).world;
      const Pose start = sample_start_poses(world, 1, seed)[0];
      SimConfig c;
      c.planner = PlannerKind::Pipe;
      c.rays.range = 40.0;
      c.stride = 4;
      c.budget = 8000;
      c.seed = seed;
      auto pred = std::make_shared<StructuralPredictor>();
      Simulation sim(world, c, pred, start);
      const std::string tag = std::string(map_class_name(cls)) + " seed " + std::to_string(seed);
      std::size_t known = 0;
      auto check_predictor = [&] {
        const auto e = pred->predict(sim.observed(), 4, seed + static_cast<std::uint64_t>(sim.t()));
        for (const auto& m : e.members)
          for (std::size_t i = 0; i < m.size(); ++i) {
            const CellState s = sim.observed()[i];
            flag(s == CellState::Unknown || m[i] == (s == CellState::Occupied ? 1.0 : 0.0),
                 tag + ": prediction contradicts an observed cell");
          }
        ++checks;
      };
      while (sim.step()) {
        ++steps;
        flag(world.at(sim.pose()) == CellState::Free, tag + ": robot in a wall");
        const std::size_t now = known_count(sim.observed());
        flag(now >= known, tag + ": knowledge shrank");
        known = now;
        for (std::size_t i = 0; i < world.size(); ++i)
          if (sim.observed()[i] != CellState::Unknown && sim.observed()[i] != world[i]) {
            flag(false, tag + ": observed cell differs from the world");
            break;
          }
        if (sim.t() % 250 == 0) check_predictor();
      }
      check_predictor();
    }
  return {violations == 0, fmt("6 runs, %zu steps, %zu predictor checks, %zu violations", steps, checks, violations) +
                               (first.empty() ? "" : " (first: " + first + ")")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only;
  std::string scratch;
  app.add_option("criteria", only, "criterion numbers to run (default: all)");
  app.add_option("--scratch", scratch, "directory for run outputs");
  CLI11_PARSE(app, argc, argv);
  g_scratch = scratch.empty() ? fs::temp_directory_path() / ("pathwise_acceptance_" + std::to_string(::getpid()))
                              : fs::path(scratch);
  fs::remove_all(g_scratch);
  fs::create_directories(g_scratch);

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"geometry oracle equivalence", geometry_oracle},
      {"hole correctness", hole_correctness},
      {"probabilistic raycast", probabilistic_raycast},
      {"performance", performance},
      {"exploration efficacy (t90)", efficacy},
      {"AUC direction", auc_direction},
      {"A* optimality", astar_optimality},
      {"metrics unit suite", metrics_suite},
      {"determinism", determinism},
      {"invariant suite", invariants},
  };
  const std::set<int> selected(only.begin(), only.end());
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int n = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(n)) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %2d %s  %s: %s [%.1f s]\n", n, o.pass ? "PASS" : "FAIL", criteria[i].first,
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  if (scratch.empty()) fs::remove_all(g_scratch);
  return failed ? 1 : 0;
}

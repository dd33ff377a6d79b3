// pathwise: exploration experiments from the command line.
//
//   pathwise run --config cfg.json
//   pathwise batch --config sweep.json --workers 8
//   pathwise oracle-check --seed 1 --trials 100
//   pathwise bench --class large --path 200
//   pathwise gen-map --class medium --seed 3 --output maps/medium3

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pathwise/bench.hpp"
#include "pathwise/experiment.hpp"
#include "pathwise/oracle_check.hpp"

namespace {

using namespace pathwise;

enum ExitCode { kOk = 0, kUsage = 2, kRunFailure = 3, kOracleFailure = 4 };

struct Overrides {
  std::string config;
  std::string output;
  std::string planner;
  int workers = 0;
  int budget = -1;
  long long seed = -1;
};

ExperimentConfig resolve(const Overrides& o) {
  ExperimentConfig c = load_config(o.config);
  if (!o.output.empty()) c.output = o.output;
  if (!o.planner.empty()) c.planners = {detail::planner_from_string(o.planner)};
  if (o.workers > 0) c.workers = o.workers;
  if (o.budget >= 0) c.sim.budget = o.budget;
  if (o.seed >= 0) c.seed = static_cast<std::uint64_t>(o.seed);
  return c;
}

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("-o,--output", o.output, "output directory");
  cmd->add_option("-w,--workers", o.workers, "worker threads (total)");
  cmd->add_option("--budget", o.budget, "step budget T");
  cmd->add_option("--seed", o.seed, "root seed");
}

int cmd_run_main(const Overrides& o) {
  const ExperimentConfig c = resolve(o);
  for (const auto& r : cmd_run(c))
    std::printf("%s start=(%d,%d) steps=%d auc=%.3f t90=%s t95=%s%s\n", r.planner.c_str(), r.start.x, r.start.y,
                r.steps, r.summary.auc, r.summary.t90 ? std::to_string(*r.summary.t90).c_str() : "fail",
                r.summary.t95 ? std::to_string(*r.summary.t95).c_str() : "fail", r.stalled ? " (stalled)" : "");
  return kOk;
}

int cmd_batch_main(const Overrides& o) {
  const ExperimentConfig c = resolve(o);
  const BatchResult b = cmd_batch(c);
  std::fputs(tables_text(b.table).c_str(), stdout);
  for (const auto& r : b.outcomes)
    if (!r.record) std::fprintf(stderr, "run %s failed: %s\n", r.id.c_str(), r.error.c_str());
  return b.any_failed() ? kRunFailure : kOk;
}

void dump_counterexample(const OracleTrial& t, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto mask_pgm = [](const VisibilityMask& m) { return encode_pgm(to_graymap(m)); };
  write_file((dir / "map.pgm").string(), encode_pgm(to_graymap(t.map)));
  write_file((dir / "optimized.pgm").string(), mask_pgm(t.optimized));
  write_file((dir / "oracle.pgm").string(), mask_pgm(t.oracle));
  nlohmann::json path = nlohmann::json::array();
  for (const Pose& p : t.path) path.push_back({p.x, p.y});
  write_file((dir / "path.json").string(),
             nlohmann::json{{"path", path},
                            {"range", t.rays.range},
                            {"rays", t.rays.samples},
                            {"epsilon", t.rays.epsilon},
                            {"diff", t.report.diff},
                            {"allowed", t.report.allowed},
                            {"off_boundary", t.report.off_boundary}}
                     .dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pathwise exploration planning experiments"};
  app.require_subcommand(1);

  Overrides run_o, batch_o;
  auto* run = app.add_subcommand("run", "single run: first world, first planner, every start");
  add_overrides(run, run_o);
  run->add_option("-p,--planner", run_o.planner, "planner override");
  auto* batch = app.add_subcommand("batch", "every world x start x planner, with aggregate tables");
  add_overrides(batch, batch_o);

  std::uint64_t oc_seed = 1;
  int oc_trials = 100;
  std::string oc_out = "oracle-check";
  bool oc_skip_holes = false;
  auto* oracle = app.add_subcommand("oracle-check", "merged path masks against the per-pose reference");
  oracle->add_option("--seed", oc_seed, "seed");
  oracle->add_option("--trials", oc_trials, "number of trials (the first is a loop around a pillar)");
  oracle->add_option("-o,--output", oc_out, "where a counterexample is dumped");
  oracle->add_flag("--skip-holes", oc_skip_holes, "disable trapped-region removal (demonstrates the failure)");

  std::string b_class = "large";
  double b_res = 10.0;
  int b_path = 200, b_reps = 3, b_workers = 8;
  std::uint64_t b_seed = 1;
  bool b_no_select = false;
  auto* bench = app.add_subcommand("bench", "timings: per-pose fills vs merged polygons vs parallel selection");
  bench->add_option("--class", b_class, "map class (small, medium, large)");
  bench->add_option("--resolution", b_res, "cells per meter");
  bench->add_option("--path", b_path, "path length in poses");
  bench->add_option("--reps", b_reps, "repetitions (median reported)");
  bench->add_option("--workers", b_workers, "workers for the parallel selection timing");
  bench->add_option("--seed", b_seed, "map seed");
  bench->add_flag("--no-selection", b_no_select, "skip the frontier selection timing");

  std::string g_class = "small", g_out = "map";
  double g_res = 10.0;
  std::uint64_t g_seed = 1;
  auto* gen = app.add_subcommand("gen-map", "write a generated floorplan (JSON) and its raster (PGM)");
  gen->add_option("--class", g_class, "map class (small, medium, large)");
  gen->add_option("--seed", g_seed, "generator seed");
  gen->add_option("--resolution", g_res, "cells per meter");
  gen->add_option("-o,--output", g_out, "output path prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*run) return cmd_run_main(run_o);
    if (*batch) return cmd_batch_main(batch_o);
    if (*oracle) {
      if (oc_trials < 1) throw ConfigError("--trials must be >= 1");
      OracleCheckOptions opt;
      opt.extract_holes = !oc_skip_holes;
      const auto res = run_oracle_check(oc_seed, oc_trials, opt);
      std::printf("oracle-check: %d trials, %d failures, max symmetric difference %zu cells\n", res.trials,
                  res.failures, res.max_diff);
      if (res.counterexample) {
        dump_counterexample(*res.counterexample, oc_out);
        std::printf("counterexample written to %s\n", oc_out.c_str());
        return kOracleFailure;
      }
      return kOk;
    }
    if (*bench) {
      GeneratorParams gp;
      gp.resolution = b_res;
      const GroundTruthGrid world = rasterize_floorplan(generate_floorplan(b_seed, parse_map_class(b_class), gp)).world;
      const auto cells = free_cells(world);
      const Pose start = cells[cells.size() / 2];
      const auto path = long_walk(world, start, b_path);
      const PredictedGrid pred = binary_prediction(world);
      const RaySettings rays{200.0, 360, 0.8};
      const auto mb = bench_path_masks(pred, std::span<const Pose>(path), rays, b_reps);
      std::printf("map %dx%d, path %zu poses\n", mb.width, mb.height, mb.samples);
      std::printf("per-pose fills: %.4f s  merged polygons: %.4f s  speedup %.2fx  (mask diff %zu cells)\n",
                  mb.naive_s, mb.union_s, mb.speedup(), mb.diff);
      if (!b_no_select) {
        const auto sc = make_selection_scenario(world, start, 300.0, 3, b_seed);
        const auto sb = bench_selection(sc, PlannerConfig{rays, 4}, b_workers, b_reps);
        std::printf("selection over %zu frontiers: 1 worker %.4f s, %d workers %.4f s, reduction %.1f%%%s\n",
                    sb.frontiers, sb.single_s, sb.workers, sb.parallel_s, 100.0 * sb.reduction(),
                    sb.same_choice ? "" : " (CHOICE DIFFERS)");
      }
      return kOk;
    }
    if (*gen) {
      GeneratorParams gp;
      gp.resolution = g_res;
      const FloorplanSpec spec = generate_floorplan(g_seed, parse_map_class(g_class), gp);
      const auto parent = std::filesystem::path(g_out).parent_path();
      if (!parent.empty()) std::filesystem::create_directories(parent);
      write_file(g_out + ".json", floorplan_to_json(spec).dump(2) + "\n");
      write_file(g_out + ".pgm", encode_pgm(to_graymap(rasterize_floorplan(spec).world)));
      std::printf("wrote %s.json and %s.pgm\n", g_out.c_str(), g_out.c_str());
      return kOk;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRunFailure;
  }
  return kUsage;
}

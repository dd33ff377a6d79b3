#pragma once

// Experiment configuration, single runs and batch sweeps, and everything
// they write to disk: per-step CSV, summary JSON, graymap snapshots and the
// aggregate AUC / time-to-threshold tables.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pathwise/external_predictor.hpp"
#include "pathwise/floorplan.hpp"
#include "pathwise/graymap.hpp"
#include "pathwise/metrics.hpp"
#include "pathwise/planners.hpp"
#include "pathwise/predictor.hpp"
#include "pathwise/simulator.hpp"
#include "pathwise/worker_pool.hpp"

namespace pathwise {

/// Bad configuration; the CLI maps it to the usage exit code.
class ConfigError : public Error {
 public:
  using Error::Error;
};

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Named sub-seed of a root seed.
inline std::uint64_t sub_seed(std::uint64_t root, std::string_view name, std::uint64_t index = 0) {
  return mix_seed(mix_seed(root, fnv1a(name)), index);
}

struct WorldSource {
  enum class Kind { Graymap, Floorplan, Generated };
  Kind kind = Kind::Generated;
  std::string path;                  // graymap or floorplan file
  std::uint64_t seed = 0;            // generator
  MapClass map_class = MapClass::Small;
  double resolution = 10.0;          // cells per meter (graymap, generator)
  std::string label;                 // table column; defaults to class or file stem
};

struct PredictorSpec {
  std::string kind = "structural";  // structural | prior | oracle-leak | external
  double p0 = 0.5;
  double rho = 0.05;
  std::string endpoint;
  int timeout_ms = 30000;
  bool fallback_prior = true;
  StructuralParams structural;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::vector<WorldSource> worlds;
  std::vector<PlannerKind> planners{PlannerKind::Pipe};
  SimConfig sim;
  PredictorSpec predictor;
  std::vector<Pose> starts;  // explicit; used for every world when set
  int sample_starts = 1;     // otherwise k seeded Free cells per world
  std::string output = "out";
  int workers = 1;
  int snapshot_every = 0;    // 0: no snapshots
};

// ---------------------------------------------------------------- config I/O

namespace detail {

inline WorldSource world_from_json(const nlohmann::json& j) {
  WorldSource w;
  if (j.contains("graymap")) {
    w.kind = WorldSource::Kind::Graymap;
    w.path = j.at("graymap").get<std::string>();
  } else if (j.contains("floorplan")) {
    w.kind = WorldSource::Kind::Floorplan;
    w.path = j.at("floorplan").get<std::string>();
  } else if (j.contains("generate")) {
    const auto& g = j.at("generate");
    w.kind = WorldSource::Kind::Generated;
    w.seed = g.value("seed", std::uint64_t{0});
    w.map_class = parse_map_class(g.value("class", std::string("small")));
    w.resolution = g.value("resolution", 10.0);
  } else {
    throw ConfigError("world needs one of graymap, floorplan, generate");
  }
  w.resolution = j.value("resolution", w.resolution);
  if (!(w.resolution > 0.0)) throw ConfigError("world resolution must be > 0");
  w.label = j.value("label", std::string());
  if (w.label.empty()) {
    w.label = w.kind == WorldSource::Kind::Generated ? std::string(map_class_name(w.map_class))
                                                     : std::filesystem::path(w.path).stem().string();
  }
  return w;
}

inline nlohmann::json world_to_json(const WorldSource& w) {
  nlohmann::json j;
  switch (w.kind) {
    case WorldSource::Kind::Graymap: j["graymap"] = w.path; break;
    case WorldSource::Kind::Floorplan: j["floorplan"] = w.path; break;
    case WorldSource::Kind::Generated:
      j["generate"] = {{"seed", w.seed}, {"class", std::string(map_class_name(w.map_class))}};
      break;
  }
  j["resolution"] = w.resolution;
  j["label"] = w.label;
  return j;
}

inline PlannerKind planner_from_string(const std::string& s) {
  const auto k = parse_planner(s);
  if (!k) throw ConfigError("unknown planner '" + s + "' (pipe, nearest, nbv2d, pw-nbv2d, upen, mapex)");
  return *k;
}

}  // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  try {
    ExperimentConfig c;
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    c.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("world")) c.worlds.push_back(detail::world_from_json(j.at("world")));
    if (j.contains("worlds"))
      for (const auto& w : j.at("worlds")) c.worlds.push_back(detail::world_from_json(w));
    if (c.worlds.empty()) throw ConfigError("config needs a world or worlds");
    if (j.contains("planner")) c.planners = {detail::planner_from_string(j.at("planner").get<std::string>())};
    if (j.contains("planners")) {
      c.planners.clear();
      for (const auto& p : j.at("planners")) c.planners.push_back(detail::planner_from_string(p.get<std::string>()));
    }
    if (c.planners.empty()) throw ConfigError("config needs at least one planner");
    if (j.contains("sim")) {
      const auto& s = j.at("sim");
      c.sim.rays.range = s.value("range", c.sim.rays.range);
      c.sim.rays.samples = s.value("rays", c.sim.rays.samples);
      c.sim.rays.epsilon = s.value("epsilon", c.sim.rays.epsilon);
      c.sim.stride = s.value("stride", c.sim.stride);
      c.sim.ensemble_size = s.value("ensemble_size", c.sim.ensemble_size);
      c.sim.budget = s.value("budget", c.sim.budget);
      c.sim.eval_every = s.value("eval_every", c.sim.eval_every);
      c.sim.iou_buffer = s.value("iou_buffer", c.sim.iou_buffer);
      c.sim.min_frontier = s.value("min_frontier", c.sim.min_frontier);
      c.sim.record_timing = s.value("record_timing", c.sim.record_timing);
      c.sim.replan_on_stale_goal = s.value("replan_on_stale_goal", c.sim.replan_on_stale_goal);
    }
    if (j.contains("predictor")) {
      const auto& p = j.at("predictor");
      c.predictor.kind = p.value("kind", c.predictor.kind);
      c.predictor.p0 = p.value("p0", c.predictor.p0);
      c.predictor.rho = p.value("rho", c.predictor.rho);
      c.predictor.endpoint = p.value("endpoint", c.predictor.endpoint);
      c.predictor.timeout_ms = p.value("timeout_ms", c.predictor.timeout_ms);
      c.predictor.fallback_prior = p.value("fallback_prior", c.predictor.fallback_prior);
    }
    if (j.contains("starts")) {
      const auto& s = j.at("starts");
      if (s.is_array()) {
        for (const auto& p : s) {
          if (!p.is_array() || p.size() != 2) throw ConfigError("starts must be [[x, y], ...] or {\"sample\": k}");
          c.starts.push_back({p[0].get<int>(), p[1].get<int>()});
        }
        if (c.starts.empty()) throw ConfigError("starts list is empty");
      } else {
        c.sample_starts = s.value("sample", 1);
      }
    }
    if (c.sample_starts < 1) throw ConfigError("starts: sample count k must be >= 1");
    c.output = j.value("output", c.output);
    c.workers = j.value("workers", c.workers);
    c.snapshot_every = j.value("snapshot_every", c.snapshot_every);
    if (c.workers < 1) throw ConfigError("workers must be >= 1");
    if (c.snapshot_every < 0) throw ConfigError("snapshot_every must be >= 0");
    try {
      c.sim.validate();
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

inline ExperimentConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return config_from_json(j);
}

/// Everything that determines a run's outcome; output location and worker
/// count are left out, so they do not change the hash.
inline nlohmann::json run_identity_json(const ExperimentConfig& c, const WorldSource& world, PlannerKind planner,
                                        Pose start, std::uint64_t sim_seed) {
  return {{"world", detail::world_to_json(world)},
          {"planner", std::string(planner_name(planner))},
          {"start", {start.x, start.y}},
          {"seed", sim_seed},
          {"sim",
           {{"range", c.sim.rays.range},
            {"rays", c.sim.rays.samples},
            {"epsilon", c.sim.rays.epsilon},
            {"stride", c.sim.stride},
            {"ensemble_size", c.sim.ensemble_size},
            {"budget", c.sim.budget},
            {"eval_every", c.sim.eval_every},
            {"iou_buffer", c.sim.iou_buffer},
            {"min_frontier", c.sim.min_frontier},
            {"replan_on_stale_goal", c.sim.replan_on_stale_goal}}},
          {"predictor",
           {{"kind", c.predictor.kind},
            {"p0", c.predictor.p0},
            {"rho", c.predictor.rho},
            {"endpoint", c.predictor.endpoint}}}};
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// ---------------------------------------------------------------- worlds, predictors, starts

inline GroundTruthGrid load_world(const WorldSource& w) {
  switch (w.kind) {
    case WorldSource::Kind::Graymap: return load_graymap(read_file(w.path), w.resolution);
    case WorldSource::Kind::Floorplan: {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(read_file(w.path));
      } catch (const nlohmann::json::exception& e) {
        throw Error("floorplan " + w.path + ": " + e.what());
      }
      auto r = rasterize_floorplan(floorplan_from_json(j));
      for (const auto& msg : r.warnings) std::fprintf(stderr, "warning: %s: %s\n", w.path.c_str(), msg.c_str());
      return std::move(r.world);
    }
    case WorldSource::Kind::Generated: {
      GeneratorParams p;
      p.resolution = w.resolution;
      return rasterize_floorplan(generate_floorplan(w.seed, w.map_class, p)).world;
    }
  }
  throw Error("unknown world source");
}

inline std::shared_ptr<const Predictor> make_predictor(const PredictorSpec& p, const GroundTruthGrid& world) {
  if (p.kind == "structural") return std::make_shared<StructuralPredictor>(p.structural);
  if (p.kind == "prior") return std::make_shared<PriorPredictor>(p.p0);
  if (p.kind == "oracle-leak") return std::make_shared<OracleLeakPredictor>(world, p.rho);
  if (p.kind == "external") {
    std::shared_ptr<const Predictor> fallback;
    if (p.fallback_prior) fallback = std::make_shared<PriorPredictor>(p.p0);
    return std::make_shared<ExternalPredictor>(p.endpoint, std::chrono::milliseconds(p.timeout_ms), fallback);
  }
  throw ConfigError("unknown predictor '" + p.kind + "' (structural, prior, oracle-leak, external)");
}

/// k Free cells drawn without replacement from a seeded generator.
inline std::vector<Pose> sample_start_poses(const GroundTruthGrid& world, int k, std::uint64_t seed) {
  std::vector<Pose> cells;
  for (int y = 0; y < world.height(); ++y)
    for (int x = 0; x < world.width(); ++x)
      if (world.at(x, y) == CellState::Free) cells.push_back({x, y});
  if (cells.empty()) throw Error("world has no free cells");
  std::mt19937_64 rng(seed);
  std::vector<Pose> out;
  for (int i = 0; i < k && !cells.empty(); ++i) {
    std::uniform_int_distribution<std::size_t> pick(0, cells.size() - 1);
    const std::size_t j = pick(rng);
    out.push_back(cells[j]);
    cells[j] = cells.back();
    cells.pop_back();
  }
  return out;
}

inline std::vector<Pose> resolve_starts(const ExperimentConfig& c, const GroundTruthGrid& world,
                                        std::size_t world_index) {
  if (!c.starts.empty()) return c.starts;
  return sample_start_poses(world, c.sample_starts, sub_seed(c.seed, "starts", world_index));
}

// ---------------------------------------------------------------- record output

inline std::string format_double(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string record_csv(const ExperimentRecord& r) {
  std::string out = "t,iou,known_fraction,goal_id,planning_ms\n";
  for (const StepRow& row : r.rows) {
    out += std::to_string(row.t) + ",";
    if (row.iou) out += format_double(*row.iou);
    out += "," + format_double(row.known_fraction) + "," + std::to_string(row.goal_id) + ",";
    if (row.planning_ms) out += format_double(*row.planning_ms, 3);
    out += "\n";
  }
  return out;
}

inline nlohmann::json record_json(const ExperimentRecord& r, const std::string& world_label) {
  nlohmann::json series = nlohmann::json::array();
  for (const IouSample& s : r.series) series.push_back({s.t, s.iou});
  nlohmann::json events = nlohmann::json::array();
  for (const SimEvent& e : r.events)
    events.push_back({{"t", e.t}, {"kind", std::string(event_name(e.kind))}, {"goal", e.goal_id}, {"reason", e.reason}});
  auto opt_int = [](const std::optional<int>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  nlohmann::json summary = {{"auc", r.summary.auc},
                            {"t90", opt_int(r.summary.t90)},
                            {"t95", opt_int(r.summary.t95)},
                            {"failed90", !r.summary.t90.has_value()},
                            {"failed95", !r.summary.t95.has_value()}};
  if (r.summary.wall_time_s) summary["wall_time"] = *r.summary.wall_time_s;
  return {{"config_hash", r.config_hash},
          {"seed", r.seed},
          {"planner", r.planner},
          {"world", world_label},
          {"start", {r.start.x, r.start.y}},
          {"steps", r.steps},
          {"complete", r.complete},
          {"stalled", r.stalled},
          {"summary", summary},
          {"series", series},
          {"events", events}};
}

inline std::string run_id(const std::string& world_label, std::size_t world_index, std::size_t start_index,
                          PlannerKind planner) {
  return world_label + "-w" + std::to_string(world_index) + "-s" + std::to_string(start_index) + "-" +
         std::string(planner_name(planner));
}

// ---------------------------------------------------------------- runs

struct RunOutcome {
  std::string id;
  std::string world_label;
  PlannerKind planner = PlannerKind::Pipe;
  std::optional<ExperimentRecord> record;  // empty when the run failed
  std::string error;
};

/// One simulation with its files written under `out_dir`.
inline ExperimentRecord execute_run(const ExperimentConfig& c, const WorldSource& source, const GroundTruthGrid& world,
                                    std::size_t world_index, std::size_t start_index, Pose start, PlannerKind planner,
                                    const std::filesystem::path& out_dir, WorkerPool* pool) {
  SimConfig sim = c.sim;
  sim.planner = planner;
  // shared across planners so every planner sees the same predictor draws
  sim.seed = sub_seed(c.seed, "sim", world_index * 1000003ULL + start_index);
  const std::string id = run_id(source.label, world_index, start_index, planner);
  auto predictor = make_predictor(c.predictor, world);
  Simulation s(world, sim, predictor, start, pool);
  if (c.snapshot_every > 0) std::filesystem::create_directories(out_dir / "snapshots");
  auto snapshot = [&] {
    char name[64];
    std::snprintf(name, sizeof name, "_t%06d.pgm", s.t());
    write_file((out_dir / "snapshots" / (id + name)).string(), encode_pgm(to_graymap(s.observed())));
  };
  const auto t0 = std::chrono::steady_clock::now();
  while (true) {
    if (c.snapshot_every > 0 && s.t() % c.snapshot_every == 0 && !s.finished()) snapshot();
    if (!s.step()) break;
  }
  ExperimentRecord rec = s.record();
  if (sim.record_timing)
    rec.summary.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rec.config_hash = hex64(fnv1a(run_identity_json(c, source, planner, start, sim.seed).dump()));
  write_file((out_dir / (id + ".csv")).string(), record_csv(rec));
  write_file((out_dir / (id + ".json")).string(), record_json(rec, source.label).dump(2) + "\n");
  return rec;
}

/// `run`: the first world and the first planner, every start.
inline std::vector<ExperimentRecord> cmd_run(const ExperimentConfig& c) {
  const std::filesystem::path out(c.output);
  std::filesystem::create_directories(out);
  const WorldSource& source = c.worlds.front();
  const GroundTruthGrid world = load_world(source);
  WorkerPool pool(c.workers);
  std::vector<ExperimentRecord> records;
  const auto starts = resolve_starts(c, world, 0);
  for (std::size_t k = 0; k < starts.size(); ++k)
    records.push_back(execute_run(c, source, world, 0, k, starts[k], c.planners.front(), out, &pool));
  return records;
}

// ---------------------------------------------------------------- aggregate tables

struct TableCell {
  std::string planner;
  std::string map;
  std::size_t runs = 0;
  std::size_t errors = 0;
  Aggregate auc;
  Aggregate t90;
  Aggregate t95;
};

struct BatchResult {
  std::vector<RunOutcome> outcomes;
  std::vector<TableCell> table;  // planners in config order, maps in first-seen order
  [[nodiscard]] bool any_failed() const {
    return std::any_of(outcomes.begin(), outcomes.end(), [](const RunOutcome& o) { return !o.record; });
  }
};

inline std::vector<TableCell> aggregate_outcomes(const std::vector<RunOutcome>& outcomes,
                                                 const std::vector<PlannerKind>& planners) {
  std::vector<std::string> maps;
  for (const auto& o : outcomes)
    if (std::find(maps.begin(), maps.end(), o.world_label) == maps.end()) maps.push_back(o.world_label);
  std::vector<TableCell> table;
  for (PlannerKind p : planners)
    for (const auto& m : maps) {
      TableCell cell;
      cell.planner = std::string(planner_name(p));
      cell.map = m;
      std::vector<std::optional<double>> auc, t90, t95;
      for (const auto& o : outcomes) {
        if (o.planner != p || o.world_label != m) continue;
        ++cell.runs;
        if (!o.record) {
          ++cell.errors;
          auc.push_back(std::nullopt);
          t90.push_back(std::nullopt);
          t95.push_back(std::nullopt);
          continue;
        }
        const RecordSummary& s = o.record->summary;
        auc.push_back(s.auc);
        t90.push_back(s.t90 ? std::optional<double>(*s.t90) : std::nullopt);
        t95.push_back(s.t95 ? std::optional<double>(*s.t95) : std::nullopt);
      }
      cell.auc = aggregate(std::span<const std::optional<double>>(auc));
      cell.t90 = aggregate(std::span<const std::optional<double>>(t90));
      cell.t95 = aggregate(std::span<const std::optional<double>>(t95));
      table.push_back(std::move(cell));
    }
  return table;
}

inline std::string mean_ci(const Aggregate& a, int digits) {
  if (a.n == 0) return "-";
  return format_double(a.mean, digits) + " ± " + format_double(a.ci95, digits);
}

inline std::string fail_rate(const Aggregate& a) {
  if (a.total == 0) return "-";
  return format_double(100.0 * static_cast<double>(a.failed) / static_cast<double>(a.total), 1) + "%";
}

inline std::string csv_number(double v, int digits) { return std::isnan(v) ? "" : format_double(v, digits); }

inline std::string auc_table_csv(const std::vector<TableCell>& t) {
  std::string out = "planner,map,runs,errors,auc_mean,auc_ci95\n";
  for (const auto& c : t)
    out += c.planner + "," + c.map + "," + std::to_string(c.runs) + "," + std::to_string(c.errors) + "," +
           csv_number(c.auc.mean, 4) + "," + csv_number(c.auc.ci95, 4) + "\n";
  return out;
}

inline std::string threshold_table_csv(const std::vector<TableCell>& t) {
  std::string out = "planner,map,runs,t90_mean,t90_ci95,t90_failed,t95_mean,t95_ci95,t95_failed\n";
  for (const auto& c : t)
    out += c.planner + "," + c.map + "," + std::to_string(c.runs) + "," + csv_number(c.t90.mean, 2) + "," +
           csv_number(c.t90.ci95, 2) + "," + std::to_string(c.t90.failed) + "," + csv_number(c.t95.mean, 2) + "," +
           csv_number(c.t95.ci95, 2) + "," + std::to_string(c.t95.failed) + "\n";
  return out;
}

/// Text layout: one row per planner, one column group per map.
inline std::string tables_text(const std::vector<TableCell>& t) {
  std::vector<std::string> planners, maps;
  for (const auto& c : t) {
    if (std::find(planners.begin(), planners.end(), c.planner) == planners.end()) planners.push_back(c.planner);
    if (std::find(maps.begin(), maps.end(), c.map) == maps.end()) maps.push_back(c.map);
  }
  auto find = [&](const std::string& p, const std::string& m) -> const TableCell& {
    return *std::find_if(t.begin(), t.end(), [&](const TableCell& c) { return c.planner == p && c.map == m; });
  };
  auto pad = [](std::string s, std::size_t w) {
    // "±" is two bytes but one column
    std::size_t cols = 0;
    for (unsigned char ch : s) cols += (ch & 0xC0) != 0x80;
    if (cols < w) s.append(w - cols, ' ');
    return s;
  };
  std::ostringstream os;
  os << "AUC of IoU (mean ± 95% CI)\n" << pad("planner", 10);
  for (const auto& m : maps) os << pad(m, 22);
  os << "\n";
  for (const auto& p : planners) {
    os << pad(p, 10);
    for (const auto& m : maps) os << pad(mean_ci(find(p, m).auc, 2), 22);
    os << "\n";
  }
  os << "\nSteps to reach 90% / 95% IoU (mean ± 95% CI, failure rate)\n" << pad("planner", 10);
  for (const auto& m : maps) os << pad(m + " 90%", 30) << pad(m + " 95%", 30);
  os << "\n";
  for (const auto& p : planners) {
    os << pad(p, 10);
    for (const auto& m : maps) {
      const TableCell& c = find(p, m);
      os << pad(mean_ci(c.t90, 1) + " (" + fail_rate(c.t90) + ")", 30)
         << pad(mean_ci(c.t95, 1) + " (" + fail_rate(c.t95) + ")", 30);
    }
    os << "\n";
  }
  return os.str();
}

/// `batch`: every world x start x planner. Runs execute concurrently on the
/// configured workers, each run single-threaded inside, so the total thread
/// count stays at the configured value.
inline BatchResult cmd_batch(const ExperimentConfig& c) {
  const std::filesystem::path out(c.output);
  std::filesystem::create_directories(out);

  struct Task {
    std::size_t world;
    std::size_t start_index;
    Pose start;
    PlannerKind planner;
  };
  std::vector<std::optional<GroundTruthGrid>> worlds(c.worlds.size());
  std::vector<std::string> world_errors(c.worlds.size());
  std::vector<Task> tasks;
  BatchResult result;
  std::vector<RunOutcome> outcomes;
  std::vector<std::size_t> slot;  // task -> outcome index
  for (std::size_t w = 0; w < c.worlds.size(); ++w) {
    std::vector<Pose> starts;
    try {
      worlds[w] = load_world(c.worlds[w]);
      starts = resolve_starts(c, *worlds[w], w);
    } catch (const Error& e) {
      world_errors[w] = e.what();
    }
    if (!worlds[w] || starts.empty()) {
      // the whole cell row for this world is marked failed, one entry per planner
      const std::size_t n = c.starts.empty() ? static_cast<std::size_t>(c.sample_starts) : c.starts.size();
      for (std::size_t k = 0; k < n; ++k)
        for (PlannerKind p : c.planners)
          outcomes.push_back({run_id(c.worlds[w].label, w, k, p), c.worlds[w].label, p, std::nullopt,
                              world_errors[w].empty() ? "no start poses" : world_errors[w]});
      continue;
    }
    for (std::size_t k = 0; k < starts.size(); ++k)
      for (PlannerKind p : c.planners) {
        tasks.push_back({w, k, starts[k], p});
        slot.push_back(outcomes.size());
        outcomes.push_back({run_id(c.worlds[w].label, w, k, p), c.worlds[w].label, p, std::nullopt, ""});
      }
  }

  WorkerPool pool(c.workers);
  pool.parallel_for(tasks.size(), [&](std::size_t i) {
    const Task& t = tasks[i];
    RunOutcome& o = outcomes[slot[i]];
    try {
      o.record = execute_run(c, c.worlds[t.world], *worlds[t.world], t.world, t.start_index, t.start, t.planner, out,
                             nullptr);
    } catch (const std::exception& e) {
      o.error = e.what();
    }
  });

  result.outcomes = std::move(outcomes);
  result.table = aggregate_outcomes(result.outcomes, c.planners);
  write_file((out / "table_auc.csv").string(), auc_table_csv(result.table));
  write_file((out / "table_threshold.csv").string(), threshold_table_csv(result.table));
  write_file((out / "tables.txt").string(), tables_text(result.table));
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& o : result.outcomes) {
    nlohmann::json r = {{"id", o.id}, {"world", o.world_label}, {"planner", std::string(planner_name(o.planner))}};
    if (o.record) {
      r["ok"] = true;
      r["config_hash"] = o.record->config_hash;
      r["auc"] = o.record->summary.auc;
    } else {
      r["ok"] = false;
      r["error"] = o.error;
    }
    runs.push_back(std::move(r));
  }
  write_file((out / "batch.json").string(), nlohmann::json{{"runs", runs}}.dump(2) + "\n");
  return result;
}

}  // namespace pathwise

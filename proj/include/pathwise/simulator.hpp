#pragma once

// The closed exploration loop: sense, (re)select a frontier when needed,
// take one 8-connected step. Map quality is evaluated every few steps by
// running the predictor on the current observations.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pathwise/frontier.hpp"
#include "pathwise/metrics.hpp"
#include "pathwise/pathing.hpp"
#include "pathwise/planners.hpp"
#include "pathwise/predictor.hpp"
#include "pathwise/raycast.hpp"
#include "pathwise/worker_pool.hpp"

namespace pathwise {

/// splitmix64 finalizer; used to derive independent sub-seeds.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct SimConfig {
  RaySettings rays{200.0, 360, 0.8};
  int stride = 1;
  int ensemble_size = 3;
  int budget = 2000;  // T, in steps
  std::uint64_t seed = 0;
  PlannerKind planner = PlannerKind::Pipe;
  int eval_every = 10;
  int iou_buffer = 2;
  int min_frontier = 3;
  bool replan_on_stale_goal = false;  // also drop the goal once it stops being a frontier
  bool record_timing = false;  // wall-clock fields make outputs differ between reruns

  void validate() const {
    if (!(rays.range > 0.0) || rays.samples < 8) throw Error("sim config: bad sensor settings");
    if (!(rays.epsilon > 0.0 && rays.epsilon <= 1.0)) throw Error("sim config: epsilon must lie in (0, 1]");
    if (stride < 1 || ensemble_size < 1 || budget < 0 || eval_every < 1 || iou_buffer < 0 || min_frontier < 1)
      throw Error("sim config: parameters must be positive");
  }
};

enum class EventKind { Replan, Stall, Complete, BudgetExhausted };

inline std::string_view event_name(EventKind k) {
  switch (k) {
    case EventKind::Replan: return "replan";
    case EventKind::Stall: return "stall";
    case EventKind::Complete: return "complete";
    case EventKind::BudgetExhausted: return "budget";
  }
  return "?";
}

struct SimEvent {
  int t = 0;
  EventKind kind = EventKind::Replan;
  int goal_id = -1;
  std::string reason;

  friend bool operator==(const SimEvent&, const SimEvent&) = default;
};

struct StepRow {
  int t = 0;
  std::optional<double> iou;  // only at evaluation steps
  double known_fraction = 0.0;
  int goal_id = -1;
  std::optional<double> planning_ms;  // only when timing is recorded and a plan was made
};

struct RecordSummary {
  double auc = 0.0;
  std::optional<int> t90;
  std::optional<int> t95;
  std::optional<double> wall_time_s;
};

struct ExperimentRecord {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string planner;
  Pose start;
  int steps = 0;
  bool complete = false;
  bool stalled = false;
  std::vector<IouSample> series;
  std::vector<StepRow> rows;
  std::vector<SimEvent> events;
  RecordSummary summary;
};

inline RecordSummary summarize(std::span<const IouSample> series, int budget) {
  RecordSummary s;
  if (series.empty()) return s;
  s.auc = auc(series, budget);
  s.t90 = time_to_threshold(series, 0.90, budget);
  s.t95 = time_to_threshold(series, 0.95, budget);
  return s;
}

class Simulation {
 public:
  Simulation(const GroundTruthGrid& world, SimConfig config, std::shared_ptr<const Predictor> predictor, Pose start,
             WorkerPool* pool = nullptr)
      : world_(world),
        config_(config),
        predictor_(std::move(predictor)),
        pool_(pool),
        pose_(start),
        observed_(make_unknown_grid(world.geometry())),
        truth_occupied_(occupied_mask(world)) {
    config_.validate();
    if (!predictor_) throw Error("simulation: predictor missing");
    if (!world.contains(start)) throw Error("simulation: start pose outside the world");
    if (world.at(start) != CellState::Free) throw Error("simulation: start pose is not free");
    record_.seed = config_.seed;
    record_.planner = std::string(planner_name(config_.planner));
    record_.start = start;
  }

  [[nodiscard]] int t() const noexcept { return t_; }
  [[nodiscard]] Pose pose() const noexcept { return pose_; }
  [[nodiscard]] const ObservedGrid& observed() const noexcept { return observed_; }
  [[nodiscard]] bool finished() const noexcept { return finished_; }
  [[nodiscard]] const std::optional<Frontier>& goal() const noexcept { return goal_; }
  [[nodiscard]] const std::vector<Pose>& pending_path() const noexcept { return pending_; }
  [[nodiscard]] const ExperimentRecord& record() const noexcept { return record_; }

  /// One iteration of the loop. Returns false once the run is over.
  bool step() {
    if (finished_) return false;
    if (t_ >= config_.budget) {
      finish(EventKind::BudgetExhausted, "time budget reached");
      return false;
    }
    StepRow row;
    row.t = t_;
    sense();
    row.known_fraction = known_fraction(observed_);

    if (needs_replan()) {
      const auto t0 = std::chrono::steady_clock::now();
      const bool ok = replan();
      if (config_.record_timing)
        row.planning_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      if (!ok) {
        row.iou = evaluate();
        row.goal_id = -1;
        record_.rows.push_back(row);
        return false;
      }
    }
    row.goal_id = goal_ ? goal_->id : -1;
    if (t_ % config_.eval_every == 0) row.iou = evaluate();
    record_.rows.push_back(row);

    // one 8-connected action along the committed path
    if (!pending_.empty()) {
      const Pose next = pending_.front();
      if (!are_neighbors(pose_, next) || world_.at(next) != CellState::Free)
        throw std::logic_error("simulation: path step is not a free neighbor");
      pose_ = next;
      pending_.erase(pending_.begin());
    }
    ++t_;
    return true;
  }

  /// Steps until the budget is used up or nothing is left to explore.
  ExperimentRecord run() {
    const auto t0 = std::chrono::steady_clock::now();
    while (step()) {
    }
    if (config_.record_timing)
      record_.summary.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return record_;
  }

 private:
  void sense() {
    const auto scan = raycast_ground_truth(pose_, config_.rays.range, world_, config_.rays.samples);
    update_from_scan(observed_, pose_, scan.rays);
  }

  // By default a waypoint is kept until it is reached, even after it stops
  // being a frontier; a path that runs into a newly seen wall is always
  // dropped early.
  bool needs_replan() const {
    if (!goal_) return true;
    if (pose_ == goal_->representative) return true;
    if (config_.replan_on_stale_goal && !is_frontier_cell(observed_, goal_->representative)) return true;
    for (const Pose& p : pending_)
      if (observed_.at(p) != CellState::Free) return true;
    return pending_.empty();
  }

  std::uint64_t prediction_seed() const { return mix_seed(config_.seed, static_cast<std::uint64_t>(t_)); }

  const PredictionEnsemble& ensemble_now() {
    if (!ensemble_ || ensemble_t_ != t_) {
      ensemble_ = predictor_->predict(observed_, config_.ensemble_size, prediction_seed());
      ensemble_t_ = t_;
    }
    return *ensemble_;
  }

  /// Picks a new goal. Returns false when the run ends here.
  bool replan() {
    goal_.reset();
    pending_.clear();
    const auto frontiers = extract_frontiers(observed_, config_.min_frontier);
    if (frontiers.empty()) {
      finish(EventKind::Complete, "no frontiers left");
      return false;
    }
    PlannerInput in;
    in.pose = pose_;
    in.observed = &observed_;
    in.frontiers = frontiers;
    in.config = PlannerConfig{config_.rays, config_.stride};
    if (uses_prediction(config_.planner)) in.ensemble = &ensemble_now();
    WorkerPool local(1);
    Selection sel = select_frontier(config_.planner, in, pool_ ? *pool_ : local);
    if (!sel.index) {
      // nothing changes any more: the robot cannot reach any frontier
      finish(EventKind::Stall, std::to_string(frontiers.size()) + " frontiers, none reachable");
      record_.stalled = true;
      return false;
    }
    goal_ = frontiers[*sel.index];
    GridPath& path = sel.scores[*sel.index].path;
    pending_.assign(path.poses.begin() + 1, path.poses.end());
    record_.events.push_back({t_, EventKind::Replan, goal_->id, std::to_string(frontiers.size()) + " frontiers"});
    return true;
  }

  double evaluate() {
    const PredictionEnsemble& e = ensemble_now();
    const double iou = buffered_iou(occupied_mask(e.fused), truth_occupied_, config_.iou_buffer);
    if (record_.series.empty() || record_.series.back().t < t_) record_.series.push_back({t_, iou});
    return iou;
  }

  void finish(EventKind kind, std::string reason) {
    finished_ = true;
    record_.complete = kind == EventKind::Complete;
    record_.steps = t_;
    record_.events.push_back({t_, kind, -1, std::move(reason)});
    if (record_.series.empty() || record_.series.back().t < t_) evaluate();
    record_.summary = summarize(record_.series, config_.budget);
  }

  const GroundTruthGrid& world_;
  SimConfig config_;
  std::shared_ptr<const Predictor> predictor_;
  WorkerPool* pool_;
  int t_ = 0;
  Pose pose_;
  ObservedGrid observed_;
  VisibilityMask truth_occupied_;
  std::optional<Frontier> goal_;
  std::vector<Pose> pending_;
  std::optional<PredictionEnsemble> ensemble_;
  int ensemble_t_ = -1;
  bool finished_ = false;
  ExperimentRecord record_;
};

inline ExperimentRecord simulate(const GroundTruthGrid& world, const SimConfig& config,
                                 std::shared_ptr<const Predictor> predictor, Pose start, WorkerPool* pool = nullptr) {
  Simulation sim(world, config, std::move(predictor), start, pool);
  return sim.run();
}

}  // namespace pathwise

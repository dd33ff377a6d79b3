#pragma once

// Map prediction: seeded ensembles of predicted occupancy grids, their mean
// and their per-cell population variance.

#include <algorithm>
#include <array>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "pathwise/grid.hpp"

namespace pathwise {

struct PredictionEnsemble {
  std::vector<PredictedGrid> members;
  PredictedGrid fused;            // per-cell mean
  UncertaintyGrid uncertainty;    // per-cell population variance
  std::size_t clamped_cells = 0;  // observation violations repaired in the members
};

/// Forces observed cells to 1 (Occupied) / 0 (Free) and clamps the rest to
/// [0, 1]. Returns how many observed cells had to be changed.
inline std::size_t preserve_observations(PredictedGrid& member, const ObservedGrid& observed) {
  if (!(member.geometry() == observed.geometry())) throw Error("prediction: geometry mismatch");
  std::size_t changed = 0;
  for (std::size_t i = 0; i < member.size(); ++i) {
    const CellState s = observed[i];
    if (s == CellState::Unknown) {
      member[i] = std::clamp(member[i], 0.0, 1.0);
      continue;
    }
    const double want = s == CellState::Occupied ? 1.0 : 0.0;
    if (member[i] != want) {
      member[i] = want;
      ++changed;
    }
  }
  return changed;
}

inline PredictionEnsemble make_ensemble(std::vector<PredictedGrid> members) {
  if (members.empty()) throw Error("prediction: ensemble needs at least one member");
  const GridGeometry g = members.front().geometry();
  for (const auto& m : members)
    if (!(m.geometry() == g)) throw Error("prediction: members differ in geometry");
  PredictionEnsemble e;
  e.fused = PredictedGrid(g, 0.0);
  e.uncertainty = UncertaintyGrid(g, 0.0);
  const double n = static_cast<double>(members.size());
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    double sum = 0.0;
    for (const auto& m : members) sum += m[i];
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& m : members) ss += (m[i] - mean) * (m[i] - mean);
    e.fused[i] = mean;
    e.uncertainty[i] = ss / n;
  }
  e.members = std::move(members);
  return e;
}

class Predictor {
 public:
  virtual ~Predictor() = default;
  [[nodiscard]] virtual std::string name() const = 0;
  /// One member; member `index` of an ensemble seeded with `seed`.
  [[nodiscard]] virtual PredictedGrid predict_member(const ObservedGrid& observed, std::uint64_t seed,
                                                     int index) const = 0;

  /// `n` members, clamped to the observations, fused. Deterministic given
  /// (observed, n, seed) and the predictor's configuration.
  [[nodiscard]] virtual PredictionEnsemble predict(const ObservedGrid& observed, int n, std::uint64_t seed) const {
    if (n < 1) throw Error("prediction: ensemble size must be >= 1");
    std::vector<PredictedGrid> members;
    members.reserve(static_cast<std::size_t>(n));
    std::size_t clamped = 0;
    for (int i = 0; i < n; ++i) {
      members.push_back(predict_member(observed, seed, i));
      clamped += preserve_observations(members.back(), observed);
    }
    PredictionEnsemble e = make_ensemble(std::move(members));
    e.clamped_cells = clamped;
    return e;
  }
};

/// Unknown cells take a constant prior.
class PriorPredictor final : public Predictor {
 public:
  explicit PriorPredictor(double p0 = 0.5) : p0_(p0) {
    if (!(p0 >= 0.0 && p0 <= 1.0)) throw Error("prior predictor: p0 must lie in [0, 1]");
  }
  [[nodiscard]] std::string name() const override { return "prior"; }
  [[nodiscard]] PredictedGrid predict_member(const ObservedGrid& observed, std::uint64_t, int) const override {
    PredictedGrid m(observed.geometry(), p0_);
    for (std::size_t i = 0; i < m.size(); ++i)
      if (observed[i] != CellState::Unknown) m[i] = observed[i] == CellState::Occupied ? 1.0 : 0.0;
    return m;
  }

 private:
  double p0_;
};

struct StructuralParams {
  double background_max = 0.1;  // unknown cells: per-member block noise in [0, background_max]
  int block = 8;                // noise block edge in cells
  int min_run = 3;              // observed wall run needed before it is extended
  int max_extension = 40;       // cells
  double closure_chance = 0.3;  // chance that an extension runs until it meets known space
  int max_closure = 300;        // cells
};

/// Heuristic stand-in for a learned inpainting model: walls seen ending at
/// the edge of the known map are continued straight into unknown space by a
/// seeded random length, sometimes all the way across (closing a room), on
/// top of low block-wise background noise. Members differ by seed, so the
/// ensemble variance concentrates where the continuation is uncertain.
class StructuralPredictor final : public Predictor {
 public:
  explicit StructuralPredictor(StructuralParams p = {}) : p_(p) {
    if (p.block < 1 || p.min_run < 1 || p.max_extension < 0) throw Error("structural predictor: bad parameters");
  }
  [[nodiscard]] std::string name() const override { return "structural"; }

  [[nodiscard]] PredictedGrid predict_member(const ObservedGrid& observed, std::uint64_t seed,
                                             int index) const override {
    const GridGeometry& g = observed.geometry();
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(index));
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    PredictedGrid m(g, 0.0);
    const int bw = (g.width + p_.block - 1) / p_.block;
    const int bh = (g.height + p_.block - 1) / p_.block;
    std::vector<double> noise(static_cast<std::size_t>(bw) * static_cast<std::size_t>(bh));
    for (double& v : noise) v = unit(rng) * p_.background_max;
    for (int y = 0; y < g.height; ++y)
      for (int x = 0; x < g.width; ++x) {
        const CellState s = observed.at(x, y);
        if (s == CellState::Unknown)
          m.set(x, y, noise[static_cast<std::size_t>(y / p_.block) * static_cast<std::size_t>(bw) +
                            static_cast<std::size_t>(x / p_.block)]);
        else
          m.set(x, y, s == CellState::Occupied ? 1.0 : 0.0);
      }

    auto occ = [&](int x, int y) { return g.contains(x, y) && observed.at(x, y) == CellState::Occupied; };
    auto unknown = [&](int x, int y) { return g.contains(x, y) && observed.at(x, y) == CellState::Unknown; };
    static constexpr std::array<std::array<int, 2>, 4> kDirs{{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};
    std::uniform_int_distribution<int> length(0, p_.max_extension);
    for (int y = 0; y < g.height; ++y)
      for (int x = 0; x < g.width; ++x) {
        if (!occ(x, y)) continue;
        for (const auto& d : kDirs) {
          if (!unknown(x + d[0], y + d[1])) continue;
          int run = 1;
          while (run < p_.min_run && occ(x - run * d[0], y - run * d[1])) ++run;
          if (run < p_.min_run) continue;
          // consume both draws for every candidate so members stay aligned
          const int len = length(rng);
          const bool close = unit(rng) < p_.closure_chance;
          const int limit = close ? p_.max_closure : len;
          for (int k = 1; k <= limit; ++k) {
            const int cx = x + k * d[0], cy = y + k * d[1];
            if (!unknown(cx, cy)) break;
            m.set(cx, cy, 1.0);
          }
        }
      }
    return m;
  }

 private:
  StructuralParams p_;
};

/// Test-only upper bound: the true world in unknown cells, with each
/// unknown cell flipped independently at rate `rho`.
class OracleLeakPredictor final : public Predictor {
 public:
  OracleLeakPredictor(GroundTruthGrid world, double rho) : world_(std::move(world)), rho_(rho) {
    if (!(rho >= 0.0 && rho <= 1.0)) throw Error("oracle-leak predictor: rho must lie in [0, 1]");
  }
  [[nodiscard]] std::string name() const override { return "oracle-leak"; }
  [[nodiscard]] PredictedGrid predict_member(const ObservedGrid& observed, std::uint64_t seed,
                                             int index) const override {
    if (!(observed.geometry() == world_.geometry())) throw Error("oracle-leak predictor: geometry mismatch");
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(index));
    std::bernoulli_distribution flip(rho_);
    PredictedGrid m(observed.geometry(), 0.0);
    for (std::size_t i = 0; i < m.size(); ++i) {
      bool occupied = observed[i] == CellState::Unknown ? world_[i] == CellState::Occupied
                                                        : observed[i] == CellState::Occupied;
      if (observed[i] == CellState::Unknown && flip(rng)) occupied = !occupied;
      m[i] = occupied ? 1.0 : 0.0;
    }
    return m;
  }

 private:
  GroundTruthGrid world_;
  double rho_;
};

}  // namespace pathwise

#pragma once

// Map-quality and exploration-efficiency metrics: buffered IoU of occupied
// cells, area under the IoU curve, time to an IoU threshold, and mean with
// a normal-approximation 95% interval over runs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "pathwise/grid.hpp"
#include "pathwise/polygon.hpp"
#include "pathwise/predictor.hpp"

namespace pathwise {

/// Cells within Chebyshev distance r of a set cell (separable square max).
inline VisibilityMask dilate(const VisibilityMask& m, int r) {
  if (r < 0) throw Error("dilate: radius must be >= 0");
  if (r == 0) return m;
  const GridGeometry& g = m.geometry();
  VisibilityMask rows(g), out(g);
  for (int y = 0; y < g.height; ++y) {
    int last = -1 - r - 1;  // most recent set x seen scanning left to right
    int next = -1;          // nearest set x at or right of the cursor
    for (int x = 0; x < g.width; ++x) {
      if (m.test(x, y)) last = x;
      if (next < x) {
        next = x;
        while (next < g.width && !m.test(next, y)) ++next;
      }
      if (x - last <= r || (next < g.width && next - x <= r)) rows.set(x, y);
    }
  }
  for (int x = 0; x < g.width; ++x) {
    int last = -1 - r - 1;
    int next = -1;
    for (int y = 0; y < g.height; ++y) {
      if (rows.test(x, y)) last = y;
      if (next < y) {
        next = y;
        while (next < g.height && !rows.test(x, next)) ++next;
      }
      if (y - last <= r || (next < g.height && next - y <= r)) out.set(x, y);
    }
  }
  return out;
}

struct IouCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  [[nodiscard]] double iou() const {
    const std::size_t d = tp + fp + fn;
    return d == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(d);
  }
};

/// TP: predicted cells with a true cell within r; FP: the other predicted
/// cells; FN: true cells with no predicted cell within r.
inline IouCounts buffered_iou_counts(const VisibilityMask& predicted, const VisibilityMask& truth, int r) {
  if (!(predicted.geometry() == truth.geometry())) throw Error("buffered IoU: geometry mismatch");
  const VisibilityMask truth_near = dilate(truth, r);
  const VisibilityMask pred_near = dilate(predicted, r);
  IouCounts c;
  const auto p = predicted.cells();
  const auto t = truth.cells();
  const auto tn = truth_near.cells();
  const auto pn = pred_near.cells();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i]) (tn[i] ? c.tp : c.fp)++;
    if (t[i] && !pn[i]) ++c.fn;
  }
  return c;
}

inline double buffered_iou(const VisibilityMask& predicted, const VisibilityMask& truth, int r) {
  return buffered_iou_counts(predicted, truth, r).iou();
}

inline VisibilityMask occupied_mask(const GroundTruthGrid& world) {
  VisibilityMask m(world.geometry());
  auto cells = m.cells();
  for (std::size_t i = 0; i < world.size(); ++i) cells[i] = world[i] == CellState::Occupied ? 1 : 0;
  return m;
}

/// Cells the fused prediction calls occupied (probability above `threshold`).
inline VisibilityMask occupied_mask(const PredictedGrid& fused, double threshold = 0.5) {
  VisibilityMask m(fused.geometry());
  auto cells = m.cells();
  for (std::size_t i = 0; i < fused.size(); ++i) cells[i] = fused[i] > threshold ? 1 : 0;
  return m;
}

struct IouSample {
  int t = 0;
  double iou = 0.0;

  friend bool operator==(const IouSample&, const IouSample&) = default;
};

/// Trapezoidal area under the piecewise-linear curve over [0, horizon]. The
/// last value is held until the horizon and the first value back to 0.
inline double auc(std::span<const IouSample> series, int horizon) {
  if (series.empty()) throw Error("auc: empty series");
  double a = 0.0;
  a += series.front().iou * std::max(0, std::min(series.front().t, horizon));
  for (std::size_t i = 1; i < series.size(); ++i) {
    const IouSample& p = series[i - 1];
    const IouSample& q = series[i];
    if (p.t >= horizon) break;
    if (q.t <= horizon) {
      a += 0.5 * (p.iou + q.iou) * (q.t - p.t);
    } else {
      const double v = p.iou + (q.iou - p.iou) * (horizon - p.t) / static_cast<double>(q.t - p.t);
      a += 0.5 * (p.iou + v) * (horizon - p.t);
    }
  }
  if (series.back().t < horizon) a += series.back().iou * (horizon - series.back().t);
  return a;
}

/// First time the curve reaches `theta`, interpolating linearly between
/// evaluations and rounding up; nothing if it never does within `budget`.
inline std::optional<int> time_to_threshold(std::span<const IouSample> series, double theta, int budget) {
  if (!(theta > 0.0 && theta <= 1.0)) throw Error("time_to_threshold: theta must lie in (0, 1]");
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series[i].iou < theta) continue;
    double t = series[i].t;
    if (i > 0) {
      const IouSample& p = series[i - 1];
      t = p.t + (theta - p.iou) / (series[i].iou - p.iou) * (series[i].t - p.t);
    }
    const int steps = static_cast<int>(std::ceil(t - 1e-9));
    if (steps > budget) return std::nullopt;
    return steps;
  }
  return std::nullopt;
}

struct Aggregate {
  std::size_t total = 0;
  std::size_t failed = 0;
  std::size_t n = 0;  // successful runs averaged
  double mean = std::numeric_limits<double>::quiet_NaN();
  double ci95 = std::numeric_limits<double>::quiet_NaN();  // half-width

  [[nodiscard]] double failure_rate() const {
    return total == 0 ? 0.0 : static_cast<double>(failed) / static_cast<double>(total);
  }
};

/// Mean and 1.96 * s / sqrt(n) with the sample standard deviation over the
/// present values; missing values count as failures and are left out.
inline Aggregate aggregate(std::span<const std::optional<double>> values) {
  Aggregate a;
  a.total = values.size();
  double sum = 0.0;
  for (const auto& v : values) {
    if (!v) {
      ++a.failed;
      continue;
    }
    ++a.n;
    sum += *v;
  }
  if (a.n == 0) return a;
  a.mean = sum / static_cast<double>(a.n);
  if (a.n == 1) {
    a.ci95 = 0.0;
    return a;
  }
  double ss = 0.0;
  for (const auto& v : values)
    if (v) ss += (*v - a.mean) * (*v - a.mean);
  a.ci95 = 1.96 * std::sqrt(ss / static_cast<double>(a.n - 1)) / std::sqrt(static_cast<double>(a.n));
  return a;
}

inline Aggregate aggregate(std::span<const double> values) {
  std::vector<std::optional<double>> v(values.begin(), values.end());
  return aggregate(std::span<const std::optional<double>>(v));
}

}  // namespace pathwise

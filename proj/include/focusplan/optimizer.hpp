#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "focusplan/cost.hpp"

namespace focusplan {

/// Range of focus distances keeping one point inside one camera's
/// DoF-clipped frustum. The module-wide search domain is (f, H_eff].
using StabbingInterval = FocusInterval;

inline constexpr std::int32_t kUnassigned = -1;

/// Result of the focus optimization: one focus distance per camera, the
/// point-to-camera assignment, per-point costs under that plan, and the
/// total-cost trace across iterations.
struct FocusPlan {
  std::vector<double> focus;
  std::vector<std::int32_t> assignment;
  std::vector<double> point_costs;
  std::vector<double> cost_trace;
  int iterations = 0;

  double final_cost() const { return cost_trace.empty() ? 0.0 : cost_trace.back(); }
};

enum class InitStrategy { kAverage, kClosest, kHyperfocal };

struct EmOptions {
  InitStrategy init = InitStrategy::kAverage;
  int max_iters = 50;
};

/// Focus distances for which the sample sits inside the camera's DoF
/// frustum; empty when the sample misses the lateral image pyramid.
inline StabbingInterval point_focus_interval(const Camera& cam, const SurfaceSample& sample) {
  const PixelProjection proj = project(cam.pose, cam.intrinsics, cam.lens, sample.position);
  if (!proj.in_image) return StabbingInterval{};
  return focus_interval_for_depth(cam.lens, proj.depth);
}

namespace detail {

struct SweepSegment {
  int count = 0;       // intervals covering the segment
  double lo = 0.0;     // segment of focus distances achieving that count
  double hi = 0.0;
  double midpoint() const { return 0.5 * (lo + hi); }
};

// Maximum-overlap segment of a set of closed intervals (classic endpoint
// sweep). Among equal-count segments prefers the longest, then the smallest
// focus distance. Returns nullopt when every interval is empty.
inline std::optional<SweepSegment> sweep_max_overlap(std::vector<StabbingInterval> intervals) {
  struct Event {
    double x;
    bool is_start;
  };
  std::vector<Event> events;
  events.reserve(2 * intervals.size());
  for (const StabbingInterval& iv : intervals) {
    if (iv.empty()) continue;
    events.push_back({iv.lo, true});
    events.push_back({iv.hi, false});
  }
  if (events.empty()) return std::nullopt;
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    if (a.x != b.x) return a.x < b.x;
    return a.is_start && !b.is_start;  // starts first: closed intervals
  });

  // Group events per coordinate. At a coordinate the closed coverage count
  // includes both the intervals starting there and those ending there.
  struct Group {
    double x;
    int starts;
    int ends;
  };
  std::vector<Group> grouped;
  for (std::size_t i = 0; i < events.size();) {
    Group g{events[i].x, 0, 0};
    while (i < events.size() && events[i].x == g.x) {
      events[i].is_start ? ++g.starts : ++g.ends;
      ++i;
    }
    grouped.push_back(g);
  }

  // Pass 1: maximum coverage count.
  int running = 0, best = 0;
  for (const Group& g : grouped) {
    running += g.starts;
    best = std::max(best, running);
    running -= g.ends;
  }

  // Pass 2: collect maximal segments where the closed coverage equals best.
  SweepSegment winner;
  bool have_winner = false;
  running = 0;
  bool in_segment = false;
  double seg_start = 0.0;
  for (const Group& g : grouped) {
    running += g.starts;
    if (!in_segment && running == best) {
      in_segment = true;
      seg_start = g.x;
    }
    running -= g.ends;
    if (in_segment && running < best) {
      in_segment = false;
      SweepSegment seg{best, seg_start, g.x};
      const double len = seg.hi - seg.lo;
      const double best_len = winner.hi - winner.lo;
      if (!have_winner || len > best_len || (len == best_len && seg.lo < winner.lo)) {
        winner = seg;
        have_winner = true;
      }
    }
  }
  if (!have_winner) return std::nullopt;
  return winner;
}

inline double clamp_focus(const LensConfig& lens, double s) {
  const double lo = lens.focal_length_mm * (1.0 + 1e-9) + 1e-9;
  const double hi = effective_hyperfocal(lens);
  return std::min(std::max(s, lo), hi);
}

}  // namespace detail

/// Assigns each sample to the camera with the lowest cost under the given
/// focus distances; ties go to the lowest camera index. Samples costing 1
/// everywhere are left unassigned (they still contribute 1 to the total).
inline std::vector<std::int32_t> assignment_step(const PairTable& table,
                                                 const std::vector<double>& focus) {
  std::vector<std::int32_t> assignment(table.sample_count(), kUnassigned);
  detail::parallel_for(table.sample_count(), [&](std::size_t p) {
    double best = 1.0;
    std::int32_t best_c = kUnassigned;
    for (std::size_t c = 0; c < table.camera_count(); ++c) {
      const double k = table.cost(p, c, focus[c]);
      if (k < best) {
        best = k;
        best_c = static_cast<std::int32_t>(c);
      }
    }
    assignment[p] = best_c;
  });
  return assignment;
}

inline std::vector<std::int32_t> assignment_step(const CameraRig& rig,
                                                 const std::vector<double>& focus,
                                                 const std::vector<SurfaceSample>& samples,
                                                 const CostParams& params, const Bvh& bvh) {
  if (focus.size() != rig.size())
    throw ValidationError("focus plan length does not match camera count");
  return assignment_step(PairTable(rig, samples, params, bvh), focus);
}

/// Per-camera exact minimization: the focus distance whose DoF frustum
/// captures the largest subset of the camera's assigned points, found by an
/// endpoint sweep over the points' feasible intervals. The representative
/// distance is the midpoint of the winning segment. Cameras with no usable
/// assigned points keep their previous focus distance.
inline std::vector<double> minimization_step(const PairTable& table,
                                             const std::vector<std::int32_t>& assignment,
                                             const std::vector<double>& previous_focus,
                                             const LensConfig& lens) {
  std::vector<std::vector<StabbingInterval>> per_camera(table.camera_count());
  for (std::size_t p = 0; p < assignment.size(); ++p) {
    if (assignment[p] == kUnassigned) continue;
    const auto c = static_cast<std::size_t>(assignment[p]);
    const StabbingInterval iv = table.interval(p, c);
    if (!iv.empty()) per_camera[c].push_back(iv);
  }
  std::vector<double> focus = previous_focus;
  detail::parallel_for(table.camera_count(), [&](std::size_t c) {
    if (const auto seg = detail::sweep_max_overlap(std::move(per_camera[c])))
      focus[c] = detail::clamp_focus(lens, seg->midpoint());
  });
  return focus;
}

inline std::vector<double> minimization_step(const CameraRig& rig,
                                             const std::vector<std::int32_t>& assignment,
                                             const std::vector<SurfaceSample>& samples,
                                             const std::vector<double>& previous_focus) {
  if (assignment.size() != samples.size())
    throw ValidationError("assignment length does not match sample count");
  std::vector<std::vector<StabbingInterval>> per_camera(rig.size());
  for (std::size_t p = 0; p < samples.size(); ++p) {
    if (assignment[p] == kUnassigned) continue;
    const auto c = static_cast<std::size_t>(assignment[p]);
    const StabbingInterval iv = point_focus_interval(rig.camera(c), samples[p]);
    if (!iv.empty()) per_camera[c].push_back(iv);
  }
  std::vector<double> focus = previous_focus;
  for (std::size_t c = 0; c < rig.size(); ++c) {
    if (const auto seg = detail::sweep_max_overlap(std::move(per_camera[c])))
      focus[c] = detail::clamp_focus(rig.lens, seg->midpoint());
  }
  return focus;
}

namespace detail {

inline double plan_cost(const PairTable& table, const std::vector<std::int32_t>& assignment,
                        const std::vector<double>& focus) {
  double total = 0.0;
  for (std::size_t p = 0; p < assignment.size(); ++p) {
    total += assignment[p] == kUnassigned
                 ? 1.0
                 : table.cost(p, static_cast<std::size_t>(assignment[p]),
                              focus[static_cast<std::size_t>(assignment[p])]);
  }
  return total;
}

}  // namespace detail

/// Closest-depth protocol: each camera focuses at the smallest axial depth
/// among samples visible to it; cameras seeing nothing fall back to the
/// effective hyperfocal distance.
inline std::vector<double> baseline_closest(const PairTable& table, const LensConfig& lens) {
  std::vector<double> focus(table.camera_count(), effective_hyperfocal(lens));
  for (std::size_t c = 0; c < table.camera_count(); ++c) {
    double closest = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < table.sample_count(); ++p)
      if (table.is_visible(p, c)) closest = std::min(closest, table.depth(p, c));
    if (std::isfinite(closest)) focus[c] = detail::clamp_focus(lens, closest);
  }
  return focus;
}

/// Average-depth protocol: mean visible axial depth per camera, hyperfocal
/// fallback.
inline std::vector<double> baseline_average(const PairTable& table, const LensConfig& lens) {
  std::vector<double> focus(table.camera_count(), effective_hyperfocal(lens));
  for (std::size_t c = 0; c < table.camera_count(); ++c) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t p = 0; p < table.sample_count(); ++p) {
      if (table.is_visible(p, c)) {
        sum += table.depth(p, c);
        ++count;
      }
    }
    if (count > 0) focus[c] = detail::clamp_focus(lens, sum / static_cast<double>(count));
  }
  return focus;
}

inline std::vector<double> baseline_closest(const CameraRig& rig,
                                            const std::vector<SurfaceSample>& samples,
                                            const Bvh& bvh) {
  return baseline_closest(PairTable(rig, samples, CostParams{}, bvh), rig.lens);
}

inline std::vector<double> baseline_average(const CameraRig& rig,
                                            const std::vector<SurfaceSample>& samples,
                                            const Bvh& bvh) {
  return baseline_average(PairTable(rig, samples, CostParams{}, bvh), rig.lens);
}

inline std::vector<double> initial_focus(const PairTable& table, const LensConfig& lens,
                                         InitStrategy init) {
  switch (init) {
    case InitStrategy::kClosest:
      return baseline_closest(table, lens);
    case InitStrategy::kHyperfocal:
      return std::vector<double>(table.camera_count(), effective_hyperfocal(lens));
    case InitStrategy::kAverage:
      break;
  }
  return baseline_average(table, lens);
}

/// Alternating minimization over assignments and focus distances. Both steps
/// are exact minimizations of the total cost over their block, so the cost
/// trace is non-increasing; the loop stops when the relative improvement
/// falls below em_eps (or at max_iters). The returned assignment is always
/// consistent with the returned focus distances.
inline FocusPlan optimize(const PairTable& table, const LensConfig& lens, const CostParams& params,
                          const EmOptions& options = {}) {
  FocusPlan plan;
  plan.focus = initial_focus(table, lens, options.init);
  plan.assignment = assignment_step(table, plan.focus);
  double cost = detail::plan_cost(table, plan.assignment, plan.focus);
  plan.cost_trace.push_back(cost);

  for (int iter = 0; iter < options.max_iters; ++iter) {
    const double cost_old = cost;
    plan.focus = minimization_step(table, plan.assignment, plan.focus, lens);
    plan.assignment = assignment_step(table, plan.focus);
    cost = detail::plan_cost(table, plan.assignment, plan.focus);
    plan.cost_trace.push_back(cost);
    ++plan.iterations;
    if (cost > cost_old * (1.0 - params.em_eps) || cost == cost_old) break;
  }

  plan.point_costs.resize(table.sample_count());
  for (std::size_t p = 0; p < table.sample_count(); ++p) {
    plan.point_costs[p] =
        plan.assignment[p] == kUnassigned
            ? 1.0
            : table.cost(p, static_cast<std::size_t>(plan.assignment[p]),
                         plan.focus[static_cast<std::size_t>(plan.assignment[p])]);
  }
  return plan;
}

inline FocusPlan optimize(const CameraRig& rig, const std::vector<SurfaceSample>& samples,
                          const CostParams& params, const Bvh& bvh, const EmOptions& options = {}) {
  params.validate();
  if (rig.size() < 1 || samples.empty())
    throw ValidationError("optimize needs at least one camera and one sample");
  const PairTable table(rig, samples, params, bvh);
  return optimize(table, rig.lens, params, options);
}

}  // namespace focusplan

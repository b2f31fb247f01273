#pragma once

#include <cmath>
#include <vector>

#include "focusplan/camera.hpp"
#include "focusplan/core.hpp"

namespace focusplan {

/// Weights and thresholds of the per-point capture cost. `eps1_per_mm2` is
/// a reciprocal-area coefficient (it multiplies depth^2/cosine, which has
/// units of area, to make the term dimensionless). `eps2_mm` caps the
/// distance from the optical axis. `em_eps` is the relative-improvement
/// tolerance that stops the optimizer.
struct CostParams {
  double w1 = 1.0 / 3.0;
  double w2 = 1.0 / 3.0;
  double w3 = 1.0 / 3.0;
  double eps1_per_mm2 = 2.47e-6;
  double eps2_mm = 450.0;
  double em_eps = 1e-3;

  void validate() const {
    if (w1 < 0 || w2 < 0 || w3 < 0) throw ValidationError("cost weights must be nonnegative");
    if (std::abs(w1 + w2 + w3 - 1.0) > 1e-9) throw ValidationError("cost weights must sum to 1");
    if (!(eps1_per_mm2 > 0) || !(eps2_mm > 0))
      throw ValidationError("cost thresholds must be positive");
    if (!(em_eps > 0) || !(em_eps < 1)) throw ValidationError("em_eps must be in (0, 1)");
  }
};

/// Cost of imaging one surface point with one camera at one focus distance.
/// Invisible points carry the maximum cost of 1.
struct PointCost {
  double value = 1.0;
  double area_term = 1.0;
  double deviation_term = 1.0;
  double focus_term = 1.0;
  bool visible = false;
};

namespace detail {

inline double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

// The two focus-independent cost terms, given axial depth, perpendicular
// distance from the optical axis, and the facing cosine <n_c, n_p> (> 0).
inline double area_term_of(const CostParams& params, double depth, double cosine) {
  return clamp01(params.eps1_per_mm2 * depth * depth / cosine);
}

inline double deviation_term_of(const CostParams& params, double axis_distance) {
  return clamp01(axis_distance / params.eps2_mm);
}

}  // namespace detail

/// Per-camera cost of a surface point at focus distance `s`: a weighted sum
/// of the projected-area term, the optical-axis deviation term, and an
/// indicator of missing the DoF-clipped frustum, each clamped to [0, 1].
/// Invisible points (back-facing, out of image, or occluded) cost 1.
inline PointCost point_cost(const Camera& cam, double s, const SurfaceSample& sample,
                            const CostParams& params, const Bvh& bvh, double occlusion_eps) {
  PointCost cost;
  const double cosine = cam.pose.view_dir.dot(sample.normal);
  if (!(cosine > 0.0)) return cost;
  const PixelProjection proj = project(cam.pose, cam.intrinsics, cam.lens, sample.position);
  if (!proj.in_image) return cost;
  if (is_occluded(bvh, cam.pose.position, sample.position, occlusion_eps)) return cost;

  const Vec3 q = sample.position - cam.pose.position;
  const double axis_distance = (q - proj.depth * cam.pose.view_dir).norm();

  cost.visible = true;
  cost.area_term = detail::area_term_of(params, proj.depth, cosine);
  cost.deviation_term = detail::deviation_term_of(params, axis_distance);
  cost.focus_term = focus_interval_for_depth(cam.lens, proj.depth).contains(s) ? 0.0 : 1.0;
  cost.value = (params.w1 * cost.area_term + params.w2 * cost.deviation_term) +
               params.w3 * cost.focus_term;
  return cost;
}

inline PointCost point_cost(const Camera& cam, double s, const SurfaceSample& sample,
                            const CostParams& params, const Bvh& bvh) {
  return point_cost(cam, s, sample, params, bvh, default_occlusion_eps(bvh));
}

/// Focus-independent per-(sample, camera) data, precomputed once so that
/// cost evaluation under any focus assignment is pure arithmetic. Row-major,
/// sample-major layout. Immutable after construction.
class PairTable {
 public:
  PairTable() = default;

  PairTable(const CameraRig& rig, const std::vector<SurfaceSample>& samples,
            const CostParams& params, const Bvh& bvh)
      : n_samples_(samples.size()),
        n_cameras_(rig.size()),
        w3_(params.w3),
        base_(samples.size() * rig.size(), 1.0),
        lo_(samples.size() * rig.size(), 1.0),
        hi_(samples.size() * rig.size(), 0.0),
        depth_(samples.size() * rig.size(), 0.0),
        visible_(samples.size() * rig.size(), 0) {
    params.validate();
    rig.lens.validate();
    rig.intrinsics.validate();
    const double occlusion_eps = default_occlusion_eps(bvh);

    detail::parallel_for(n_samples_, [&](std::size_t p) {
      const SurfaceSample& sample = samples[p];
      for (std::size_t c = 0; c < n_cameras_; ++c) {
        const std::size_t k = p * n_cameras_ + c;
        const CameraPose& pose = rig.poses[c];
        const PixelProjection proj = project(pose, rig.intrinsics, rig.lens, sample.position);
        depth_[k] = proj.depth;
        if (!proj.in_image) continue;
        const FocusInterval interval = focus_interval_for_depth(rig.lens, proj.depth);
        lo_[k] = interval.lo;
        hi_[k] = interval.hi;
        const double cosine = pose.view_dir.dot(sample.normal);
        if (!(cosine > 0.0)) continue;
        if (is_occluded(bvh, pose.position, sample.position, occlusion_eps)) continue;
        visible_[k] = 1;
        const Vec3 q = sample.position - pose.position;
        const double axis_distance = (q - proj.depth * pose.view_dir).norm();
        base_[k] = params.w1 * detail::area_term_of(params, proj.depth, cosine) +
                   params.w2 * detail::deviation_term_of(params, axis_distance);
      }
    });
  }

  std::size_t sample_count() const { return n_samples_; }
  std::size_t camera_count() const { return n_cameras_; }

  bool is_visible(std::size_t p, std::size_t c) const { return visible_[p * n_cameras_ + c] != 0; }
  double depth(std::size_t p, std::size_t c) const { return depth_[p * n_cameras_ + c]; }

  /// DoF-feasible focus interval; empty when the sample misses the lateral
  /// pyramid (or sits at depth <= f).
  FocusInterval interval(std::size_t p, std::size_t c) const {
    const std::size_t k = p * n_cameras_ + c;
    return FocusInterval{lo_[k], hi_[k]};
  }

  /// Frustum membership at focus distance s (geometric, visibility-blind).
  bool in_dof_frustum(std::size_t p, std::size_t c, double s) const {
    const std::size_t k = p * n_cameras_ + c;
    return s >= lo_[k] && s <= hi_[k];
  }

  /// kappa for the pair under focus distance s.
  double cost(std::size_t p, std::size_t c, double s) const {
    const std::size_t k = p * n_cameras_ + c;
    if (!visible_[k]) return 1.0;
    return base_[k] + w3_ * ((s >= lo_[k] && s <= hi_[k]) ? 0.0 : 1.0);
  }

  /// Focus-independent part of kappa (1 for invisible pairs).
  double base_cost(std::size_t p, std::size_t c) const {
    const std::size_t k = p * n_cameras_ + c;
    return visible_[k] ? base_[k] : 1.0;
  }

 private:
  std::size_t n_samples_ = 0;
  std::size_t n_cameras_ = 0;
  double w3_ = 1.0 / 3.0;
  std::vector<double> base_;
  std::vector<double> lo_, hi_;
  std::vector<double> depth_;
  std::vector<std::uint8_t> visible_;
};

struct TotalCost {
  double total = 0.0;                  // sum over samples of the per-point minimum
  std::vector<PointCost> per_point;    // cost achieved by the best camera
  std::vector<std::int32_t> best_camera;  // -1 when every camera costs 1
};

/// Total plan cost: the Monte-Carlo sum over samples of the minimum cost
/// over cameras, with each camera evaluated at its planned focus distance.
inline TotalCost total_cost(const CameraRig& rig, const std::vector<double>& focus,
                            const std::vector<SurfaceSample>& samples, const CostParams& params,
                            const Bvh& bvh) {
  if (focus.size() != rig.size())
    throw ValidationError("focus plan length does not match camera count");
  const PairTable table(rig, samples, params, bvh);
  TotalCost result;
  result.per_point.resize(samples.size());
  result.best_camera.assign(samples.size(), -1);
  const double occlusion_eps = default_occlusion_eps(bvh);
  for (std::size_t p = 0; p < samples.size(); ++p) {
    double best = 1.0;
    std::int32_t best_c = -1;
    for (std::size_t c = 0; c < rig.size(); ++c) {
      const double k = table.cost(p, c, focus[c]);
      if (k < best) {
        best = k;
        best_c = static_cast<std::int32_t>(c);
      }
    }
    result.best_camera[p] = best_c;
    result.per_point[p] = best_c >= 0 ? point_cost(rig.camera(static_cast<std::size_t>(best_c)),
                                                   focus[static_cast<std::size_t>(best_c)],
                                                   samples[p], params, bvh, occlusion_eps)
                                      : PointCost{};
    result.total += best;
  }
  return result;
}

}  // namespace focusplan

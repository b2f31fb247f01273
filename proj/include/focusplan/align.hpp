#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <vector>

#include "focusplan/camera.hpp"
#include "focusplan/core.hpp"

namespace focusplan {

/// Similarity transform p -> scale * R * p + t.
struct SimilarityTransform {
  double scale = 1.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  double rms = 0.0;  // fit residual over the input correspondences

  Vec3 apply(const Vec3& p) const { return scale * (rotation * p) + translation; }
};

/// Least-squares similarity aligning `source` onto `target` (Umeyama
/// closed form: centered cross-covariance SVD, scale from the variance
/// ratio). Requires >= 3 non-collinear correspondences.
inline SimilarityTransform fit_similarity(const std::vector<Vec3>& source,
                                          const std::vector<Vec3>& target) {
  if (source.size() != target.size())
    throw ValidationError("correspondence lists differ in length");
  const std::size_t n = source.size();
  if (n < 3) throw ValidationError("need at least 3 correspondences");

  Vec3 mean_src = Vec3::Zero(), mean_tgt = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    mean_src += source[i];
    mean_tgt += target[i];
  }
  mean_src /= static_cast<double>(n);
  mean_tgt /= static_cast<double>(n);

  Mat3 cov = Mat3::Zero();
  double var_src = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 s = source[i] - mean_src;
    const Vec3 t = target[i] - mean_tgt;
    cov += t * s.transpose();
    var_src += s.squaredNorm();
  }
  cov /= static_cast<double>(n);
  var_src /= static_cast<double>(n);

  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sigma = svd.singularValues();
  // Collinear (or coincident) source points give a rank-deficient
  // cross-covariance and an underdetermined rotation.
  if (sigma(1) <= 1e-12 * std::max(sigma(0), 1e-300))
    throw ValidationError("degenerate correspondence configuration (collinear points?)");

  Mat3 sign_fix = Mat3::Identity();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) sign_fix(2, 2) = -1.0;

  SimilarityTransform result;
  result.rotation = svd.matrixU() * sign_fix * svd.matrixV().transpose();
  if (!(var_src > 0.0)) throw ValidationError("source points are coincident");
  result.scale = (sigma.asDiagonal() * sign_fix).trace() / var_src;
  if (!(result.scale > 0.0)) throw ValidationError("fit produced a non-positive scale");
  result.translation = mean_tgt - result.scale * (result.rotation * mean_src);

  double sq_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sq_sum += (target[i] - result.apply(source[i])).squaredNorm();
  result.rms = std::sqrt(sq_sum / static_cast<double>(n));
  return result;
}

struct ReprojectionReport {
  double mean_px = 0.0;   // mean residual over inliers
  std::size_t inliers = 0;
  std::size_t gated_out = 0;  // residuals above the gate
};

/// Mean pixel residual between projected 3D points and 2D observations,
/// discarding residuals above `gate_px`.
inline ReprojectionReport reprojection_error(const std::vector<Vec3>& points3d,
                                             const std::vector<Eigen::Vector2d>& observations2d,
                                             const Camera& cam, double gate_px = 4.0) {
  if (points3d.size() != observations2d.size())
    throw ValidationError("points and observations differ in length");
  ReprojectionReport report;
  double sum = 0.0;
  for (std::size_t i = 0; i < points3d.size(); ++i) {
    const PixelProjection proj = project(cam.pose, cam.intrinsics, cam.lens, points3d[i]);
    const double r = std::hypot(proj.u - observations2d[i].x(), proj.v - observations2d[i].y());
    if (proj.depth > 0.0 && r <= gate_px) {
      sum += r;
      ++report.inliers;
    } else {
      ++report.gated_out;
    }
  }
  if (report.inliers > 0) report.mean_px = sum / static_cast<double>(report.inliers);
  return report;
}

struct PoseDelta {
  double translation_mm = 0.0;
  double rotation_deg = 0.0;
};

/// Repeatability of two pose estimates: Euclidean distance between the
/// translations and the relative rotation angle acos((trace(R1^T R2) - 1)/2),
/// with the acos argument clamped against numeric drift.
inline PoseDelta pose_repeatability(const Vec3& t1, const Mat3& r1, const Vec3& t2,
                                    const Mat3& r2) {
  PoseDelta delta;
  delta.translation_mm = (t1 - t2).norm();
  const double arg = ((r1.transpose() * r2).trace() - 1.0) / 2.0;
  delta.rotation_deg = rad2deg(std::acos(std::clamp(arg, -1.0, 1.0)));
  return delta;
}

/// Rotation matrix of a camera pose (columns: image x, image y, forward).
inline Mat3 pose_rotation(const CameraPose& pose) {
  Mat3 r;
  r.col(0) = pose.right();
  r.col(1) = pose.down();
  r.col(2) = pose.view_dir;
  return r;
}

inline PoseDelta pose_repeatability(const CameraPose& a, const CameraPose& b) {
  return pose_repeatability(a.position, pose_rotation(a), b.position, pose_rotation(b));
}

}  // namespace focusplan

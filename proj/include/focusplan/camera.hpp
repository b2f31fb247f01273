#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "focusplan/bvh.hpp"
#include "focusplan/sampling.hpp"

namespace focusplan {

/// Thin-lens parameters. The circle of confusion together with the focal
/// length and f-number fixes the hyperfocal distance; `hyperfocal_scale`
/// shrinks the depth of field for tighter sharpness control by scaling the
/// hyperfocal distance used in the limit formulas.
struct LensConfig {
  double focal_length_mm = 6.0;
  double f_number = 1.8;
  double coc_mm = 0.007007;
  double hyperfocal_scale = 2.0;

  void validate() const {
    if (!(focal_length_mm > 0) || !(f_number > 0) || !(coc_mm > 0))
      throw ValidationError("lens parameters must be positive");
    if (!(hyperfocal_scale >= 1)) throw ValidationError("hyperfocal_scale must be >= 1");
  }
};

inline double hyperfocal(const LensConfig& lens) {
  return lens.focal_length_mm * lens.focal_length_mm / (lens.f_number * lens.coc_mm) +
         lens.focal_length_mm;
}

inline double effective_hyperfocal(const LensConfig& lens) {
  return lens.hyperfocal_scale * hyperfocal(lens);
}

struct DofLimits {
  double near_mm = 0.0;
  double far_mm = std::numeric_limits<double>::infinity();  // infinity past the hyperfocal
};

/// Near/far depth-of-field limits for focus distance `s`, computed with the
/// scaled (effective) hyperfocal distance.
inline DofLimits dof_limits(const LensConfig& lens, double s) {
  const double f = lens.focal_length_mm;
  if (!(s > f)) throw std::domain_error("focus distance must exceed the focal length");
  const double h = effective_hyperfocal(lens);
  DofLimits d;
  d.near_mm = s * (h - f) / (h + s - 2.0 * f);
  d.far_mm = s < h ? s * (h - f) / (h - s) : std::numeric_limits<double>::infinity();
  return d;
}

/// Closed range of focus distances; empty when lo > hi.
struct FocusInterval {
  double lo = 1.0;
  double hi = 0.0;
  bool empty() const { return !(lo <= hi); }
  bool contains(double s) const { return s >= lo && s <= hi; }
};

/// Inverts the DoF limits: the set of focus distances s (restricted to the
/// working domain (f, H_eff]) for which a point at axial depth `d` satisfies
/// near(s) <= d <= far(s). Empty when d <= f.
///
/// Derivation: d <= far(s) iff s >= d*H/(H + d - f); d >= near(s) iff
/// s <= d*(H - 2f)/(H - f - d) when d < H - f, and holds for every s
/// otherwise (both from the limit formulas, H the effective hyperfocal).
inline FocusInterval focus_interval_for_depth(const LensConfig& lens, double d) {
  const double f = lens.focal_length_mm;
  FocusInterval interval;  // default-empty
  if (!(d > f)) return interval;
  const double h = effective_hyperfocal(lens);
  interval.lo = d * h / (h + d - f);
  interval.hi = d < h - f ? std::min(d * (h - 2.0 * f) / (h - f - d), h) : h;
  return interval;
}

/// Sensor geometry. Focal length lives in LensConfig; here only the pixel
/// grid and pitch. Defaults model a portrait-mounted 8K sensor whose short
/// (width) dimension spans 47.66 degrees at f = 6 mm.
struct CameraIntrinsics {
  int width_px = 6144;
  int height_px = 8192;
  double pixel_pitch_mm = 0.00086261;
  double principal_x_px = 3072.0;
  double principal_y_px = 4096.0;

  double sensor_width_mm() const { return width_px * pixel_pitch_mm; }
  double sensor_height_mm() const { return height_px * pixel_pitch_mm; }

  void validate() const {
    if (width_px <= 0 || height_px <= 0 || !(pixel_pitch_mm > 0))
      throw ValidationError("intrinsics must have positive resolution and pixel pitch");
  }
};

inline double fov_deg(double sensor_dim_mm, double focal_length_mm) {
  return rad2deg(2.0 * std::atan(sensor_dim_mm / (2.0 * focal_length_mm)));
}

inline double horizontal_fov_deg(const CameraIntrinsics& intr, const LensConfig& lens) {
  return fov_deg(intr.sensor_width_mm(), lens.focal_length_mm);
}

inline double vertical_fov_deg(const CameraIntrinsics& intr, const LensConfig& lens) {
  return fov_deg(intr.sensor_height_mm(), lens.focal_length_mm);
}

/// Rigid camera pose: position, unit viewing direction, unit up vector
/// orthogonal to the viewing direction.
struct CameraPose {
  Vec3 position = Vec3::Zero();
  Vec3 view_dir = Vec3::UnitX();
  Vec3 up = Vec3::UnitZ();

  Vec3 right() const { return view_dir.cross(up); }  // image x axis
  Vec3 down() const { return -up; }                  // image y axis

  void validate() const {
    if (std::abs(view_dir.norm() - 1.0) > 1e-9 || std::abs(up.norm() - 1.0) > 1e-9)
      throw ValidationError("pose axes must be unit length");
    if (std::abs(view_dir.dot(up)) > 1e-9)
      throw ValidationError("up must be orthogonal to the viewing direction");
  }
};

/// Builds a valid pose from possibly unnormalized axes (up is
/// re-orthogonalized against the viewing direction).
inline CameraPose make_pose(const Vec3& position, const Vec3& view_dir, const Vec3& up_hint) {
  CameraPose pose;
  pose.position = position;
  const double len = view_dir.norm();
  if (!(len > 0)) throw ValidationError("viewing direction must be nonzero");
  pose.view_dir = view_dir / len;
  const Vec3 up = up_hint - up_hint.dot(pose.view_dir) * pose.view_dir;
  if (!(up.norm() > 1e-12)) throw ValidationError("up hint is parallel to the viewing direction");
  pose.up = up.normalized();
  return pose;
}

inline CameraPose look_at(const Vec3& position, const Vec3& target, const Vec3& up_hint) {
  return make_pose(position, target - position, up_hint);
}

/// Everything needed to reason about one physical camera.
struct Camera {
  CameraPose pose;
  CameraIntrinsics intrinsics;
  LensConfig lens;
};

/// A set of poses sharing one lens and sensor.
struct CameraRig {
  CameraIntrinsics intrinsics;
  LensConfig lens;
  std::vector<CameraPose> poses;

  std::size_t size() const { return poses.size(); }
  Camera camera(std::size_t i) const { return Camera{poses[i], intrinsics, lens}; }
};

/// Depth along the optical axis (not Euclidean range).
inline double axial_depth(const CameraPose& pose, const Vec3& p) {
  return (p - pose.position).dot(pose.view_dir);
}

struct PixelProjection {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
  bool in_image = false;  // positive depth and inside the sensor extent
};

inline PixelProjection project(const CameraPose& pose, const CameraIntrinsics& intr,
                               const LensConfig& lens, const Vec3& p) {
  PixelProjection proj;
  const Vec3 q = p - pose.position;
  proj.depth = q.dot(pose.view_dir);
  if (!(proj.depth > 0.0)) return proj;
  const double scale = lens.focal_length_mm / (proj.depth * intr.pixel_pitch_mm);
  proj.u = intr.principal_x_px + q.dot(pose.right()) * scale;
  proj.v = intr.principal_y_px + q.dot(pose.down()) * scale;
  proj.in_image = proj.u >= 0.0 && proj.u <= intr.width_px && proj.v >= 0.0 &&
                  proj.v <= intr.height_px;
  return proj;
}

/// True iff the sample projects into the image with positive depth, faces the
/// camera (inward normals: positive dot with the viewing direction), and is
/// not occluded by the scene.
inline bool visible(const Camera& cam, const Bvh& bvh, const SurfaceSample& sample,
                    double occlusion_eps) {
  if (!(cam.pose.view_dir.dot(sample.normal) > 0.0)) return false;
  if (!project(cam.pose, cam.intrinsics, cam.lens, sample.position).in_image) return false;
  return !is_occluded(bvh, cam.pose.position, sample.position, occlusion_eps);
}

inline bool visible(const Camera& cam, const Bvh& bvh, const SurfaceSample& sample) {
  return visible(cam, bvh, sample, default_occlusion_eps(bvh));
}

/// Membership in the view frustum clipped at the depth-of-field limits for
/// focus distance `s`: inside the lateral image pyramid and within
/// [near, far]. Purely geometric; ignores normals and occlusion.
inline bool in_frustum(const CameraPose& pose, const CameraIntrinsics& intr,
                       const LensConfig& lens, double s, const Vec3& p) {
  const PixelProjection proj = project(pose, intr, lens, p);
  if (!proj.in_image) return false;
  const DofLimits dof = dof_limits(lens, s);
  return proj.depth >= dof.near_mm && proj.depth <= dof.far_mm;
}

/// Object-space size of one pixel at the sample's axial depth. The sample
/// must be visible to the camera (occlusion is the caller's responsibility;
/// the projective and facing conditions are checked here).
inline double resolution_at(const CameraPose& pose, const CameraIntrinsics& intr,
                            const LensConfig& lens, const SurfaceSample& sample) {
  const PixelProjection proj = project(pose, intr, lens, sample.position);
  if (!proj.in_image || !(pose.view_dir.dot(sample.normal) > 0.0))
    throw std::domain_error("resolution_at: sample is not visible to this camera");
  return proj.depth * intr.pixel_pitch_mm / lens.focal_length_mm;
}

/// Image-space smear, in pixels, of a point tracked for `exposure_s` seconds
/// while the view sweeps at `omega_deg_per_s`. `pixels_across` is the pixel
/// count of the image dimension the motion runs along.
inline double motion_blur(double pixels_across, double fov_deg, double omega_deg_per_s,
                          double exposure_s) {
  return pixels_across / fov_deg * omega_deg_per_s * exposure_s;
}

/// Explicit plane form of the DoF-clipped frustum: four lateral planes plus
/// the near plane and, below the effective hyperfocal, the far plane.
/// Normals point inward; a point is inside iff all signed distances are >= 0.
struct Frustum {
  struct Plane {
    Vec3 normal;
    double offset;  // plane is {p : normal . p + offset >= 0}
    double signed_distance(const Vec3& p) const { return normal.dot(p) + offset; }
  };

  std::vector<Plane> planes;

  bool contains(const Vec3& p) const {
    for (const Plane& pl : planes)
      if (pl.signed_distance(p) < 0.0) return false;
    return true;
  }
};

inline Frustum make_frustum(const CameraPose& pose, const CameraIntrinsics& intr,
                            const LensConfig& lens, double s) {
  const double f = lens.focal_length_mm;
  const Vec3 fwd = pose.view_dir;
  const Vec3 right = pose.right();
  const Vec3 down = pose.down();

  // Rays through the four sensor corners, in scene units.
  const double hx0 = -intr.principal_x_px * intr.pixel_pitch_mm;
  const double hx1 = (intr.width_px - intr.principal_x_px) * intr.pixel_pitch_mm;
  const double hy0 = -intr.principal_y_px * intr.pixel_pitch_mm;
  const double hy1 = (intr.height_px - intr.principal_y_px) * intr.pixel_pitch_mm;
  const Vec3 c00 = f * fwd + hx0 * right + hy0 * down;
  const Vec3 c10 = f * fwd + hx1 * right + hy0 * down;
  const Vec3 c11 = f * fwd + hx1 * right + hy1 * down;
  const Vec3 c01 = f * fwd + hx0 * right + hy1 * down;

  Frustum frustum;
  auto add_lateral = [&](const Vec3& a, const Vec3& b) {
    const Vec3 n = a.cross(b).normalized();  // corner order makes normals inward
    frustum.planes.push_back({n, -n.dot(pose.position)});
  };
  add_lateral(c00, c10);  // top (v = 0)
  add_lateral(c10, c11);  // right (u = width)
  add_lateral(c11, c01);  // bottom (v = height)
  add_lateral(c01, c00);  // left (u = 0)

  const DofLimits dof = dof_limits(lens, s);
  frustum.planes.push_back({fwd, -fwd.dot(pose.position + dof.near_mm * fwd)});
  if (std::isfinite(dof.far_mm))
    frustum.planes.push_back({-fwd, fwd.dot(pose.position + dof.far_mm * fwd)});
  return frustum;
}

}  // namespace focusplan

#pragma once

#include <cmath>

#include "focusplan/mesh.hpp"

namespace focusplan {

namespace detail {

// Surface of revolution: a profile of (height along axis, radius) pairs is
// swept around `axis` through `base`, with pole fans at both ends when the
// end radii are zero. Profile rows must be ordered along the axis.
inline Mesh lathe(const Vec3& base, const Vec3& axis, const std::vector<std::pair<double, double>>& profile,
                  int segments) {
  const Vec3 w = axis.normalized();
  Vec3 seed = std::abs(w.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
  const Vec3 u = (seed - seed.dot(w) * w).normalized();
  const Vec3 v = w.cross(u);

  Mesh mesh;
  std::vector<std::vector<std::uint32_t>> rings;
  for (const auto& [h, r] : profile) {
    std::vector<std::uint32_t> ring;
    if (r <= 1e-9) {  // collapse numerically-zero rings into pole points
      ring.push_back(static_cast<std::uint32_t>(mesh.vertices.size()));
      mesh.vertices.push_back(base + h * w);
    } else {
      for (int s = 0; s < segments; ++s) {
        const double phi = 2.0 * kPi * s / segments;
        ring.push_back(static_cast<std::uint32_t>(mesh.vertices.size()));
        mesh.vertices.push_back(base + h * w + r * (std::cos(phi) * u + std::sin(phi) * v));
      }
    }
    rings.push_back(std::move(ring));
  }

  for (std::size_t i = 0; i + 1 < rings.size(); ++i) {
    const auto& a = rings[i];
    const auto& b = rings[i + 1];
    if (a.size() == 1 && b.size() == 1) continue;
    if (a.size() == 1) {
      for (int s = 0; s < segments; ++s)
        mesh.triangles.push_back({a[0], b[s], b[(s + 1) % segments]});
    } else if (b.size() == 1) {
      for (int s = 0; s < segments; ++s)
        mesh.triangles.push_back({a[s], b[0], a[(s + 1) % segments]});
    } else {
      for (int s = 0; s < segments; ++s) {
        const int t = (s + 1) % segments;
        mesh.triangles.push_back({a[s], b[s], b[t]});
        mesh.triangles.push_back({a[s], b[t], a[t]});
      }
    }
  }
  mesh.remove_degenerate_triangles();
  return mesh;
}

}  // namespace detail

inline Mesh make_sphere(const Vec3& center, double radius, int rings = 24, int segments = 32) {
  std::vector<std::pair<double, double>> profile;
  for (int i = 0; i <= rings; ++i) {
    const double theta = kPi * i / rings;  // 0 at -axis pole
    profile.emplace_back(-radius * std::cos(theta), radius * std::sin(theta));
  }
  return detail::lathe(center, Vec3::UnitZ(), profile, segments);
}

inline Mesh make_ellipsoid(const Vec3& center, const Vec3& semi_axes, int rings = 24,
                           int segments = 32) {
  Mesh mesh = make_sphere(Vec3::Zero(), 1.0, rings, segments);
  for (Vec3& v : mesh.vertices) v = center + v.cwiseProduct(semi_axes);
  return mesh;
}

/// Capsule: a cylinder of radius `radius` from `p0` to `p1` with
/// hemispherical caps.
inline Mesh make_capsule(const Vec3& p0, const Vec3& p1, double radius, int cap_rings = 8,
                         int segments = 24) {
  const Vec3 axis = p1 - p0;
  const double length = axis.norm();
  if (!(length > 0)) return make_sphere(p0, radius, 2 * cap_rings, segments);
  std::vector<std::pair<double, double>> profile;
  for (int i = 0; i <= cap_rings; ++i) {
    const double theta = 0.5 * kPi * i / cap_rings;
    profile.emplace_back(-radius * std::cos(theta), radius * std::sin(theta));
  }
  for (int i = 0; i <= cap_rings; ++i) {
    const double theta = 0.5 * kPi * i / cap_rings;
    profile.emplace_back(length + radius * std::sin(theta), radius * std::cos(theta));
  }
  return detail::lathe(p0, axis, profile, segments);
}

inline Mesh make_box(const Vec3& center, const Vec3& half_extents) {
  Mesh mesh;
  for (int c = 0; c < 8; ++c) {
    const Vec3 corner(c & 1 ? 1.0 : -1.0, c & 2 ? 1.0 : -1.0, c & 4 ? 1.0 : -1.0);
    mesh.vertices.push_back(center + corner.cwiseProduct(half_extents));
  }
  // two triangles per face, outward winding
  const std::uint32_t faces[6][4] = {{0, 2, 6, 4}, {1, 5, 7, 3}, {0, 4, 5, 1},
                                     {2, 3, 7, 6}, {0, 1, 3, 2}, {4, 6, 7, 5}};
  for (const auto& f : faces) {
    mesh.triangles.push_back({f[0], f[1], f[2]});
    mesh.triangles.push_back({f[0], f[2], f[3]});
  }
  return mesh;
}

/// Articulated-free body stand-in: ellipsoid torso and pelvis, sphere head,
/// capsule neck, arms, and legs. Anterior is +x, medial-lateral is y, and
/// the body stands on z = 0, roughly `height_mm` tall.
inline Mesh make_humanoid_phantom(double height_mm = 1800.0, int detail_segments = 28) {
  const double s = height_mm / 1800.0;
  Mesh body;

  // head + neck
  body.append(make_sphere(Vec3(0, 0, 1700 * s), 95 * s, 16, detail_segments));
  body.append(make_capsule(Vec3(0, 0, 1500 * s), Vec3(0, 0, 1620 * s), 50 * s, 6, detail_segments));
  // torso + pelvis
  body.append(make_ellipsoid(Vec3(0, 0, 1200 * s), Vec3(110, 170, 320) * s, 20, detail_segments));
  body.append(make_ellipsoid(Vec3(0, 0, 900 * s), Vec3(100, 160, 150) * s, 16, detail_segments));
  // arms (hanging, slightly abducted)
  body.append(make_capsule(Vec3(0, 185 * s, 1430 * s), Vec3(0, 210 * s, 790 * s), 45 * s, 6,
                           detail_segments));
  body.append(make_capsule(Vec3(0, -185 * s, 1430 * s), Vec3(0, -210 * s, 790 * s), 45 * s, 6,
                           detail_segments));
  // legs
  body.append(make_capsule(Vec3(0, 95 * s, 80 * s), Vec3(0, 95 * s, 880 * s), 75 * s, 6,
                           detail_segments));
  body.append(make_capsule(Vec3(0, -95 * s, 80 * s), Vec3(0, -95 * s, 880 * s), 75 * s, 6,
                           detail_segments));
  return body;
}

}  // namespace focusplan

#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "focusplan/core.hpp"

namespace focusplan {

struct Aabb {
  Vec3 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
          std::numeric_limits<double>::max()};
  Vec3 hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest(),
          std::numeric_limits<double>::lowest()};

  void expand(const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  void expand(const Aabb& b) {
    lo = lo.cwiseMin(b.lo);
    hi = hi.cwiseMax(b.hi);
  }
  bool contains(const Aabb& b) const {
    return (lo.array() <= b.lo.array()).all() && (hi.array() >= b.hi.array()).all();
  }
  Vec3 center() const { return 0.5 * (lo + hi); }
  double diagonal() const { return (hi - lo).norm(); }
  bool empty() const { return (lo.array() > hi.array()).any(); }
};

/// Indexed triangle surface. Coordinates are millimeters unless the loader
/// was given a unit scale. Triangles with area below `kDegenerateArea` are
/// dropped at load/validation time.
struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  std::vector<Vec3> vertex_normals;  // optional; empty or one per vertex

  static constexpr double kDegenerateArea = 1e-12;  // mm^2

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t triangle_count() const { return triangles.size(); }
  bool empty() const { return vertices.empty() || triangles.empty(); }

  Vec3 triangle_vertex(std::size_t tri, int corner) const {
    return vertices[triangles[tri][corner]];
  }

  double triangle_area(std::size_t tri) const {
    const Vec3 a = triangle_vertex(tri, 0);
    const Vec3 b = triangle_vertex(tri, 1);
    const Vec3 c = triangle_vertex(tri, 2);
    return 0.5 * (b - a).cross(c - a).norm();
  }

  /// Unit facet normal from winding order (right-hand rule). Orientation
  /// relative to the solid interior is resolved later, at sampling time.
  Vec3 facet_normal(std::size_t tri) const {
    const Vec3 a = triangle_vertex(tri, 0);
    const Vec3 b = triangle_vertex(tri, 1);
    const Vec3 c = triangle_vertex(tri, 2);
    return (b - a).cross(c - a).normalized();
  }

  double surface_area() const {
    double total = 0.0;
    for (std::size_t t = 0; t < triangles.size(); ++t) total += triangle_area(t);
    return total;
  }

  Aabb bounds() const {
    Aabb box;
    for (const Vec3& v : vertices) box.expand(v);
    return box;
  }

  /// Drops out-of-range and degenerate triangles in place. Returns the
  /// number of triangles removed.
  std::size_t remove_degenerate_triangles() {
    std::vector<std::array<std::uint32_t, 3>> keep;
    keep.reserve(triangles.size());
    for (const auto& tri : triangles) {
      if (tri[0] >= vertices.size() || tri[1] >= vertices.size() || tri[2] >= vertices.size())
        continue;
      const Vec3 a = vertices[tri[0]];
      const Vec3 b = vertices[tri[1]];
      const Vec3 c = vertices[tri[2]];
      if (0.5 * (b - a).cross(c - a).norm() <= kDegenerateArea) continue;
      keep.push_back(tri);
    }
    const std::size_t dropped = triangles.size() - keep.size();
    triangles = std::move(keep);
    return dropped;
  }

  /// Checks the structural invariants; throws ValidationError on failure.
  void validate() const {
    if (empty()) throw ValidationError("mesh is empty");
    for (const auto& tri : triangles) {
      if (tri[0] >= vertices.size() || tri[1] >= vertices.size() || tri[2] >= vertices.size())
        throw ValidationError("triangle index out of range");
    }
    if (!(surface_area() > 0.0)) throw ValidationError("mesh has zero surface area");
    if (!vertex_normals.empty() && vertex_normals.size() != vertices.size())
      throw ValidationError("vertex normal count does not match vertex count");
  }

  /// Appends another mesh (used to assemble multi-part phantoms).
  void append(const Mesh& other) {
    const auto base = static_cast<std::uint32_t>(vertices.size());
    vertices.insert(vertices.end(), other.vertices.begin(), other.vertices.end());
    for (const auto& tri : other.triangles)
      triangles.push_back({tri[0] + base, tri[1] + base, tri[2] + base});
    vertex_normals.clear();  // normals are not meaningful across parts
  }

  void translate(const Vec3& d) {
    for (Vec3& v : vertices) v += d;
  }
};

}  // namespace focusplan

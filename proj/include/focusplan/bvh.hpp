#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "focusplan/mesh.hpp"

namespace focusplan {

struct RayHit {
  double t = 0.0;
  std::uint32_t triangle = 0;
};

namespace detail {

// Moller-Trumbore, double-sided. Returns the ray parameter on hit.
// `v0` plus the two edges are precomputed per triangle.
inline bool ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& v0, const Vec3& e1,
                         const Vec3& e2, double& t_out) {
  const Vec3 pvec = dir.cross(e2);
  const double det = e1.dot(pvec);
  if (std::abs(det) < 1e-16) return false;
  const double inv_det = 1.0 / det;
  const Vec3 tvec = origin - v0;
  const double u = tvec.dot(pvec) * inv_det;
  if (u < 0.0 || u > 1.0) return false;
  const Vec3 qvec = tvec.cross(e1);
  const double v = dir.dot(qvec) * inv_det;
  if (v < 0.0 || u + v > 1.0) return false;
  t_out = e2.dot(qvec) * inv_det;
  return true;
}

inline bool ray_box(const Vec3& origin, const Vec3& inv_dir, const Aabb& box, double tmin,
                    double tmax) {
  for (int a = 0; a < 3; ++a) {
    double t0 = (box.lo[a] - origin[a]) * inv_dir[a];
    double t1 = (box.hi[a] - origin[a]) * inv_dir[a];
    if (t0 > t1) std::swap(t0, t1);
    tmin = std::max(tmin, t0);
    tmax = std::min(tmax, t1);
    if (tmin > tmax) return false;
  }
  return true;
}

}  // namespace detail

/// Axis-aligned bounding-volume hierarchy over a mesh's triangles.
/// Immutable after construction; all queries are const and thread-safe.
class Bvh {
 public:
  struct Node {
    Aabb box;
    std::int32_t right_child = -1;  // inner: left child is the next node
    std::int32_t first = 0;         // leaf: range into the permuted triangle arrays
    std::int32_t count = 0;         // leaf iff count > 0
    bool is_leaf() const { return count > 0; }
  };

  Bvh() = default;

  explicit Bvh(const Mesh& mesh, int leaf_size = 4) : leaf_size_(std::max(1, leaf_size)) {
    const std::size_t n = mesh.triangle_count();
    tri_index_.resize(n);
    std::iota(tri_index_.begin(), tri_index_.end(), 0u);

    std::vector<Vec3> centroids(n);
    std::vector<Aabb> boxes(n);
    for (std::size_t t = 0; t < n; ++t) {
      const Vec3 a = mesh.triangle_vertex(t, 0);
      const Vec3 b = mesh.triangle_vertex(t, 1);
      const Vec3 c = mesh.triangle_vertex(t, 2);
      boxes[t].expand(a);
      boxes[t].expand(b);
      boxes[t].expand(c);
      centroids[t] = (a + b + c) / 3.0;
    }

    if (n > 0) {
      nodes_.reserve(2 * n);
      build(0, n, boxes, centroids);
    }

    v0_.resize(n);
    e1_.resize(n);
    e2_.resize(n);
    for (std::size_t slot = 0; slot < n; ++slot) {
      const std::uint32_t t = tri_index_[slot];
      const Vec3 a = mesh.triangle_vertex(t, 0);
      v0_[slot] = a;
      e1_[slot] = mesh.triangle_vertex(t, 1) - a;
      e2_[slot] = mesh.triangle_vertex(t, 2) - a;
    }
  }

  bool empty() const { return nodes_.empty(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<std::uint32_t>& triangle_order() const { return tri_index_; }
  Aabb bounds() const { return nodes_.empty() ? Aabb{} : nodes_[0].box; }

  /// First hit along the ray within (tmin, tmax], or nullopt.
  std::optional<RayHit> intersect_nearest(const Vec3& origin, const Vec3& dir, double tmin = 0.0,
                                          double tmax = std::numeric_limits<double>::infinity()) const {
    if (nodes_.empty()) return std::nullopt;
    const Vec3 inv_dir = dir.cwiseInverse();
    std::int32_t stack[64];
    int sp = 0;
    stack[sp++] = 0;
    std::optional<RayHit> best;
    double best_t = tmax;
    while (sp > 0) {
      const Node& node = nodes_[stack[--sp]];
      if (!detail::ray_box(origin, inv_dir, node.box, tmin, best_t)) continue;
      if (node.is_leaf()) {
        for (std::int32_t i = node.first; i < node.first + node.count; ++i) {
          double t;
          if (detail::ray_triangle(origin, dir, v0_[i], e1_[i], e2_[i], t) && t > tmin &&
              t <= best_t) {
            best_t = t;
            best = RayHit{t, tri_index_[i]};
          }
        }
      } else {
        stack[sp++] = node.right_child;
        stack[sp++] = static_cast<std::int32_t>(&node - nodes_.data()) + 1;
      }
    }
    return best;
  }

  /// True iff any triangle is hit with ray parameter in (tmin, tmax).
  bool intersect_any(const Vec3& origin, const Vec3& dir, double tmin, double tmax) const {
    if (nodes_.empty()) return false;
    const Vec3 inv_dir = dir.cwiseInverse();
    std::int32_t stack[64];
    int sp = 0;
    stack[sp++] = 0;
    while (sp > 0) {
      const Node& node = nodes_[stack[--sp]];
      if (!detail::ray_box(origin, inv_dir, node.box, tmin, tmax)) continue;
      if (node.is_leaf()) {
        for (std::int32_t i = node.first; i < node.first + node.count; ++i) {
          double t;
          if (detail::ray_triangle(origin, dir, v0_[i], e1_[i], e2_[i], t) && t > tmin && t < tmax)
            return true;
        }
      } else {
        stack[sp++] = node.right_child;
        stack[sp++] = static_cast<std::int32_t>(&node - nodes_.data()) + 1;
      }
    }
    return false;
  }

  /// Number of triangle crossings along the ray with parameter > tmin.
  /// Used for inside/outside parity tests; callers should pick a direction
  /// unlikely to graze shared edges.
  int count_crossings(const Vec3& origin, const Vec3& dir, double tmin = 0.0) const {
    if (nodes_.empty()) return 0;
    const Vec3 inv_dir = dir.cwiseInverse();
    std::int32_t stack[64];
    int sp = 0;
    stack[sp++] = 0;
    int crossings = 0;
    while (sp > 0) {
      const Node& node = nodes_[stack[--sp]];
      if (!detail::ray_box(origin, inv_dir, node.box, tmin,
                           std::numeric_limits<double>::infinity()))
        continue;
      if (node.is_leaf()) {
        for (std::int32_t i = node.first; i < node.first + node.count; ++i) {
          double t;
          if (detail::ray_triangle(origin, dir, v0_[i], e1_[i], e2_[i], t) && t > tmin)
            ++crossings;
        }
      } else {
        stack[sp++] = node.right_child;
        stack[sp++] = static_cast<std::int32_t>(&node - nodes_.data()) + 1;
      }
    }
    return crossings;
  }

 private:
  void build(std::size_t begin, std::size_t end, const std::vector<Aabb>& boxes,
             std::vector<Vec3>& centroids) {
    Node node;
    Aabb centroid_box;
    for (std::size_t i = begin; i < end; ++i) {
      node.box.expand(boxes[tri_index_[i]]);
      centroid_box.expand(centroids[tri_index_[i]]);
    }
    const std::size_t node_index = nodes_.size();
    nodes_.push_back(node);

    const std::size_t count = end - begin;
    const Vec3 extent = centroid_box.hi - centroid_box.lo;
    int axis = 0;
    if (extent.y() > extent.x()) axis = 1;
    if (extent.z() > extent[axis]) axis = 2;

    if (count <= static_cast<std::size_t>(leaf_size_) || extent[axis] <= 0.0) {
      nodes_[node_index].first = static_cast<std::int32_t>(begin);
      nodes_[node_index].count = static_cast<std::int32_t>(count);
      return;
    }

    const std::size_t mid = begin + count / 2;
    std::nth_element(tri_index_.begin() + static_cast<std::ptrdiff_t>(begin),
                     tri_index_.begin() + static_cast<std::ptrdiff_t>(mid),
                     tri_index_.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::uint32_t a, std::uint32_t b) {
                       return centroids[a][axis] < centroids[b][axis];
                     });

    build(begin, mid, boxes, centroids);
    nodes_[node_index].right_child = static_cast<std::int32_t>(nodes_.size());
    build(mid, end, boxes, centroids);
  }

  int leaf_size_ = 4;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> tri_index_;
  std::vector<Vec3> v0_, e1_, e2_;
};

/// Default shadow-ray bias: 1e-3 of the scene's bounding-box diagonal.
inline double default_occlusion_eps(const Bvh& bvh) {
  return bvh.empty() ? 1e-3 : 1e-3 * bvh.bounds().diagonal();
}

/// True iff any triangle blocks the open segment (origin, target), ignoring
/// hits within `eps` of the target so a surface point does not occlude itself.
inline bool is_occluded(const Bvh& bvh, const Vec3& origin, const Vec3& target, double eps) {
  const Vec3 seg = target - origin;
  const double len = seg.norm();
  if (len <= eps) return false;
  const Vec3 dir = seg / len;
  return bvh.intersect_any(origin, dir, 1e-9 * len, len - eps);
}

inline bool is_occluded(const Bvh& bvh, const Vec3& origin, const Vec3& target) {
  return is_occluded(bvh, origin, target, default_occlusion_eps(bvh));
}

}  // namespace focusplan

#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "focusplan/bvh.hpp"
#include "focusplan/mesh.hpp"

namespace focusplan {

/// One Monte-Carlo surface point: position, inward unit normal, the parent
/// triangle, and the area it stands in for (total area / sample count).
struct SurfaceSample {
  Vec3 position;
  Vec3 normal;
  std::uint32_t triangle_id = 0;
  double area_weight = 0.0;
};

namespace detail {

// Fixed probe direction for inside/outside parity rays, tilted away from
// the coordinate axes so shared mesh edges are rarely grazed.
inline const Vec3 kParityDirection = Vec3(0.5377, 0.7619, 0.3612).normalized();

// True when a point just off the triangle centroid along +facet_normal lands
// inside the solid (odd number of crossings to infinity).
inline bool facet_normal_points_inward(const Mesh& mesh, const Bvh& bvh, std::size_t tri,
                                       double probe_offset) {
  const Vec3 centroid =
      (mesh.triangle_vertex(tri, 0) + mesh.triangle_vertex(tri, 1) + mesh.triangle_vertex(tri, 2)) /
      3.0;
  const Vec3 probe = centroid + probe_offset * mesh.facet_normal(tri);
  return bvh.count_crossings(probe, kParityDirection) % 2 == 1;
}

}  // namespace detail

/// Draws `n` area-uniform samples: triangle chosen proportionally to area,
/// position uniform in barycentric coordinates. Normals are facet normals
/// flipped toward the mesh interior (parity ray cast, cached per triangle).
/// Deterministic for a fixed seed.
inline std::vector<SurfaceSample> sample_surface(const Mesh& mesh, const Bvh& bvh, std::size_t n,
                                                 std::uint64_t seed) {
  if (n < 1) throw ValidationError("sample count must be >= 1");
  mesh.validate();

  const std::size_t tri_count = mesh.triangle_count();
  std::vector<double> cumulative(tri_count);
  double total = 0.0;
  for (std::size_t t = 0; t < tri_count; ++t) {
    total += mesh.triangle_area(t);
    cumulative[t] = total;
  }

  const double probe_offset = std::max(1e-4 * mesh.bounds().diagonal(), 1e-9);
  // -1 unknown, 0 winding normal is outward (flip), 1 winding normal is inward
  std::vector<signed char> inward(tri_count, -1);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pick(0.0, total);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<SurfaceSample> samples;
  samples.reserve(n);
  const double weight = total / static_cast<double>(n);

  for (std::size_t i = 0; i < n; ++i) {
    const double r = pick(rng);
    const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), r);
    const std::size_t tri =
        it == cumulative.end() ? tri_count - 1 : static_cast<std::size_t>(it - cumulative.begin());

    const double su = std::sqrt(unit(rng));
    const double v = unit(rng);
    const Vec3 a = mesh.triangle_vertex(tri, 0);
    const Vec3 b = mesh.triangle_vertex(tri, 1);
    const Vec3 c = mesh.triangle_vertex(tri, 2);

    SurfaceSample s;
    s.position = (1.0 - su) * a + su * (1.0 - v) * b + su * v * c;
    if (inward[tri] < 0)
      inward[tri] = detail::facet_normal_points_inward(mesh, bvh, tri, probe_offset) ? 1 : 0;
    const Vec3 nf = mesh.facet_normal(tri);
    s.normal = inward[tri] == 1 ? nf : Vec3(-nf);
    s.triangle_id = static_cast<std::uint32_t>(tri);
    s.area_weight = weight;
    samples.push_back(s);
  }
  return samples;
}

inline std::vector<SurfaceSample> sample_surface(const Mesh& mesh, std::size_t n,
                                                 std::uint64_t seed) {
  const Bvh bvh(mesh);
  return sample_surface(mesh, bvh, n, seed);
}

}  // namespace focusplan

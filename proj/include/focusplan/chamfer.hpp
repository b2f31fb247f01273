#pragma once

#include <random>

#include "focusplan/kdtree.hpp"
#include "focusplan/mesh.hpp"

namespace focusplan {

/// One-directional Chamfer distance between vertex sets: the mean, over up
/// to `n` vertices of `gt` (a seeded uniform subset when n < |V_gt|), of the
/// distance to the nearest vertex of `est`.
inline double chamfer(const Mesh& gt, const Mesh& est, std::size_t n, std::uint64_t seed) {
  if (gt.vertices.empty() || est.vertices.empty())
    throw ValidationError("chamfer requires two nonempty meshes");

  std::vector<std::uint32_t> source(gt.vertices.size());
  std::iota(source.begin(), source.end(), 0u);
  if (n > 0 && n < source.size()) {
    std::mt19937_64 rng(seed);
    std::shuffle(source.begin(), source.end(), rng);
    source.resize(n);
  }

  const KdTree3 tree(est.vertices);
  double sum = 0.0;
  for (const std::uint32_t v : source) sum += tree.nearest(gt.vertices[v]).distance;
  return sum / static_cast<double>(source.size());
}

}  // namespace focusplan

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "focusplan/camera.hpp"
#include "focusplan/mesh.hpp"

namespace focusplan {

/// Per-pixel axial depth in millimeters; 0 marks an invalid/missing pixel.
struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<float> depth_mm;  // row-major, width * height
  CameraIntrinsics intrinsics;
  CameraPose pose;
  double focal_length_mm = 1.88;

  float at(int u, int v) const { return depth_mm[static_cast<std::size_t>(v) * width + u]; }
  float& at(int u, int v) { return depth_mm[static_cast<std::size_t>(v) * width + u]; }
};

/// Renders the axial-depth image of a mesh from one camera by casting a ray
/// through every pixel center. Misses are 0.
inline DepthImage render_depth(const Bvh& bvh, const CameraPose& pose,
                               const CameraIntrinsics& intr, double focal_length_mm) {
  DepthImage img;
  img.width = intr.width_px;
  img.height = intr.height_px;
  img.depth_mm.assign(static_cast<std::size_t>(img.width) * img.height, 0.0f);
  img.intrinsics = intr;
  img.pose = pose;
  img.focal_length_mm = focal_length_mm;

  const Vec3 fwd = pose.view_dir;
  const Vec3 right = pose.right();
  const Vec3 down = pose.down();

  detail::parallel_for(static_cast<std::size_t>(img.height), [&](std::size_t v) {
    for (int u = 0; u < img.width; ++u) {
      const double sx = (u + 0.5 - intr.principal_x_px) * intr.pixel_pitch_mm;
      const double sy = (static_cast<double>(v) + 0.5 - intr.principal_y_px) * intr.pixel_pitch_mm;
      const Vec3 dir = (focal_length_mm * fwd + sx * right + sy * down).normalized();
      if (const auto hit = bvh.intersect_nearest(pose.position, dir, 1e-9)) {
        const Vec3 point = pose.position + hit->t * dir;
        img.at(u, static_cast<int>(v)) = static_cast<float>((point - pose.position).dot(fwd));
      }
    }
  });
  return img;
}

/// Truncated signed distance volume over a regular grid of voxel centers.
/// tsdf holds distance / truncation in [-1, 1] (positive in front of the
/// surface); weight accumulates per-frame integration weights.
struct TsdfVolume {
  Vec3 origin = Vec3::Zero();  // center of voxel (0, 0, 0)
  double voxel_size_mm = 5.0;
  int nx = 0, ny = 0, nz = 0;
  double truncation_mm = 20.0;
  std::vector<float> tsdf;
  std::vector<float> weight;

  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * ny + j) * nx + i;
  }
  Vec3 voxel_center(int i, int j, int k) const {
    return origin + voxel_size_mm * Vec3(i, j, k);
  }
  std::size_t voxel_count() const {
    return static_cast<std::size_t>(nx) * ny * nz;
  }
};

/// Volume covering `box` plus `padding_mm` on all sides.
inline TsdfVolume make_volume(const Aabb& box, double voxel_size_mm, double padding_mm,
                              double truncation_mm) {
  if (!(voxel_size_mm > 0)) throw ValidationError("voxel size must be positive");
  TsdfVolume vol;
  vol.voxel_size_mm = voxel_size_mm;
  vol.truncation_mm = truncation_mm;
  vol.origin = box.lo - Vec3::Constant(padding_mm);
  const Vec3 extent = box.hi + Vec3::Constant(padding_mm) - vol.origin;
  vol.nx = static_cast<int>(std::ceil(extent.x() / voxel_size_mm)) + 1;
  vol.ny = static_cast<int>(std::ceil(extent.y() / voxel_size_mm)) + 1;
  vol.nz = static_cast<int>(std::ceil(extent.z() / voxel_size_mm)) + 1;
  vol.tsdf.assign(vol.voxel_count(), 0.0f);
  vol.weight.assign(vol.voxel_count(), 0.0f);
  return vol;
}

inline TsdfVolume make_volume(const Aabb& box, double voxel_size_mm) {
  return make_volume(box, voxel_size_mm, 4.0 * voxel_size_mm, 4.0 * voxel_size_mm);
}

/// Folds one depth image into the volume. Near-surface voxels (|sdf| within
/// the truncation band) are averaged in with weight cos(view angle)/depth^2;
/// observed free space (sdf beyond the truncation) is carved with weight 1.
/// The weighted average makes the result independent of frame order.
inline void integrate(TsdfVolume& volume, const DepthImage& img) {
  const Vec3 fwd = img.pose.view_dir;
  const Vec3 right = img.pose.right();
  const Vec3 down = img.pose.down();
  const double pitch = img.intrinsics.pixel_pitch_mm;
  const double f = img.focal_length_mm;
  const double trunc = volume.truncation_mm;

  detail::parallel_for(static_cast<std::size_t>(volume.nz), [&](std::size_t k) {
    for (int j = 0; j < volume.ny; ++j) {
      for (int i = 0; i < volume.nx; ++i) {
        const Vec3 p = volume.voxel_center(i, j, static_cast<int>(k));
        const Vec3 q = p - img.pose.position;
        const double depth = q.dot(fwd);
        if (!(depth > 0.0)) continue;
        const double scale = f / (depth * pitch);
        const int u = static_cast<int>(img.intrinsics.principal_x_px + q.dot(right) * scale);
        const int v = static_cast<int>(img.intrinsics.principal_y_px + q.dot(down) * scale);
        if (u < 0 || u >= img.width || v < 0 || v >= img.height) continue;
        const float measured = img.at(u, v);
        if (!(measured > 0.0f)) continue;
        const double sdf = measured - depth;
        if (sdf <= -trunc) continue;  // hidden behind the observed surface

        double w;
        if (sdf > trunc) {
          w = 1.0;  // free-space carving
        } else {
          const double range = q.norm();
          w = (depth / range) / (depth * depth);
        }
        const auto idx = volume.index(i, j, static_cast<int>(k));
        const double value = std::clamp(sdf / trunc, -1.0, 1.0);
        const double w_old = volume.weight[idx];
        volume.tsdf[idx] =
            static_cast<float>((w_old * volume.tsdf[idx] + w * value) / (w_old + w));
        volume.weight[idx] = static_cast<float>(w_old + w);
      }
    }
  });
}

struct OrientedPoint {
  Vec3 position;
  Vec3 normal;  // unit, inward-pointing (against the tsdf gradient)
};

namespace detail {

inline Vec3 tsdf_gradient(const TsdfVolume& v, int i, int j, int k) {
  auto sample = [&](int a, int b, int c) {
    a = std::clamp(a, 0, v.nx - 1);
    b = std::clamp(b, 0, v.ny - 1);
    c = std::clamp(c, 0, v.nz - 1);
    return static_cast<double>(v.tsdf[v.index(a, b, c)]);
  };
  return Vec3(sample(i + 1, j, k) - sample(i - 1, j, k), sample(i, j + 1, k) - sample(i, j - 1, k),
              sample(i, j, k + 1) - sample(i, j, k - 1));
}

}  // namespace detail

/// Zero crossings of the TSDF along grid edges between observed voxels,
/// with normals from the interpolated gradient, oriented inward.
inline std::vector<OrientedPoint> extract_points(const TsdfVolume& volume) {
  std::vector<OrientedPoint> points;
  const int dirs[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (int k = 0; k < volume.nz; ++k) {
    for (int j = 0; j < volume.ny; ++j) {
      for (int i = 0; i < volume.nx; ++i) {
        const auto idx0 = volume.index(i, j, k);
        if (!(volume.weight[idx0] > 0.0f)) continue;
        const double v0 = volume.tsdf[idx0];
        for (const auto& d : dirs) {
          const int i1 = i + d[0], j1 = j + d[1], k1 = k + d[2];
          if (i1 >= volume.nx || j1 >= volume.ny || k1 >= volume.nz) continue;
          const auto idx1 = volume.index(i1, j1, k1);
          if (!(volume.weight[idx1] > 0.0f)) continue;
          const double v1 = volume.tsdf[idx1];
          if ((v0 < 0.0) == (v1 < 0.0)) continue;
          const double t = v0 / (v0 - v1);
          OrientedPoint op;
          op.position = volume.voxel_center(i, j, k) * (1.0 - t) +
                        volume.voxel_center(i1, j1, k1) * t;
          const Vec3 g = detail::tsdf_gradient(volume, i, j, k) * (1.0 - t) +
                         detail::tsdf_gradient(volume, i1, j1, k1) * t;
          const double len = g.norm();
          // gradient ascends toward free space; inward is the opposite way
          op.normal = len > 0 ? Vec3(-g / len) : Vec3(0, 0, 1);
          points.push_back(op);
        }
      }
    }
  }
  return points;
}

namespace detail {

// Kuhn six-tetrahedra decomposition of the unit cell, every tet sharing the
// main diagonal 0-7. Opposite faces of neighboring cells split along the
// same geometric diagonal, so the extracted surface is watertight across
// cells.
//
// Corner numbering: bit0 -> +x, bit1 -> +y, bit2 -> +z.
inline constexpr int kCellTets[6][4] = {{0, 1, 3, 7}, {0, 1, 5, 7}, {0, 2, 3, 7},
                                        {0, 2, 6, 7}, {0, 4, 5, 7}, {0, 4, 6, 7}};

}  // namespace detail

/// Extracts the zero level set as a triangle mesh by splitting each cell of
/// observed voxels into tetrahedra and triangulating the sign changes.
/// Triangles are wound with outward-facing normals. Throws when the volume
/// holds no observed zero crossing.
inline Mesh extract_mesh(const TsdfVolume& volume) {
  Mesh mesh;
  std::unordered_map<std::uint64_t, std::uint32_t> edge_vertex;

  auto corner_offset = [](int c) {
    return Eigen::Vector3i(c & 1 ? 1 : 0, c & 2 ? 1 : 0, c & 4 ? 1 : 0);
  };

  auto global_id = [&](const Eigen::Vector3i& g) {
    return (static_cast<std::uint64_t>(g.z()) * volume.ny + g.y()) * volume.nx + g.x();
  };

  auto edge_point = [&](const Eigen::Vector3i& ga, double va, const Eigen::Vector3i& gb,
                        double vb) -> std::uint32_t {
    const std::uint64_t ia = global_id(ga), ib = global_id(gb);
    const std::uint64_t key = ia < ib ? (ia << 32) | ib : (ib << 32) | ia;
    if (const auto it = edge_vertex.find(key); it != edge_vertex.end()) return it->second;
    const double t = va / (va - vb);
    const Vec3 pa = volume.voxel_center(ga.x(), ga.y(), ga.z());
    const Vec3 pb = volume.voxel_center(gb.x(), gb.y(), gb.z());
    const auto index = static_cast<std::uint32_t>(mesh.vertices.size());
    mesh.vertices.push_back(pa * (1.0 - t) + pb * t);
    edge_vertex.emplace(key, index);
    return index;
  };

  auto emit = [&](std::uint32_t a, std::uint32_t b, std::uint32_t c, const Vec3& outward) {
    const Vec3 n = (mesh.vertices[b] - mesh.vertices[a]).cross(mesh.vertices[c] - mesh.vertices[a]);
    if (n.dot(outward) >= 0.0)
      mesh.triangles.push_back({a, b, c});
    else
      mesh.triangles.push_back({a, c, b});
  };

  for (int k = 0; k + 1 < volume.nz; ++k) {
    for (int j = 0; j + 1 < volume.ny; ++j) {
      for (int i = 0; i + 1 < volume.nx; ++i) {
        double value[8];
        Eigen::Vector3i grid[8];
        bool observed = true;
        for (int c = 0; c < 8; ++c) {
          grid[c] = Eigen::Vector3i(i, j, k) + corner_offset(c);
          const auto idx = volume.index(grid[c].x(), grid[c].y(), grid[c].z());
          if (!(volume.weight[idx] > 0.0f)) {
            observed = false;
            break;
          }
          value[c] = volume.tsdf[idx];
        }
        if (!observed) continue;

        for (const auto& tet : detail::kCellTets) {
          int inside[4], outside[4];
          int n_in = 0, n_out = 0;
          for (int c = 0; c < 4; ++c) {
            if (value[tet[c]] < 0.0)
              inside[n_in++] = tet[c];
            else
              outside[n_out++] = tet[c];
          }
          if (n_in == 0 || n_in == 4) continue;

          // outward reference: from the mean inside corner toward the mean
          // outside corner, in grid space
          Vec3 mean_in = Vec3::Zero(), mean_out = Vec3::Zero();
          for (int c = 0; c < n_in; ++c) mean_in += grid[inside[c]].cast<double>();
          for (int c = 0; c < n_out; ++c) mean_out += grid[outside[c]].cast<double>();
          const Vec3 outward = mean_out / n_out - mean_in / n_in;

          if (n_in == 1 || n_in == 3) {
            const int lone = n_in == 1 ? inside[0] : outside[0];
            const int* others = n_in == 1 ? outside : inside;
            const std::uint32_t p0 =
                edge_point(grid[lone], value[lone], grid[others[0]], value[others[0]]);
            const std::uint32_t p1 =
                edge_point(grid[lone], value[lone], grid[others[1]], value[others[1]]);
            const std::uint32_t p2 =
                edge_point(grid[lone], value[lone], grid[others[2]], value[others[2]]);
            emit(p0, p1, p2, outward);
          } else {  // 2 in, 2 out: quad over the four crossing edges
            const std::uint32_t q00 =
                edge_point(grid[inside[0]], value[inside[0]], grid[outside[0]], value[outside[0]]);
            const std::uint32_t q01 =
                edge_point(grid[inside[0]], value[inside[0]], grid[outside[1]], value[outside[1]]);
            const std::uint32_t q10 =
                edge_point(grid[inside[1]], value[inside[1]], grid[outside[0]], value[outside[0]]);
            const std::uint32_t q11 =
                edge_point(grid[inside[1]], value[inside[1]], grid[outside[1]], value[outside[1]]);
            emit(q00, q01, q11, outward);
            emit(q00, q11, q10, outward);
          }
        }
      }
    }
  }

  mesh.remove_degenerate_triangles();
  if (mesh.empty())
    throw ValidationError("tsdf volume holds no observed zero crossing to extract");
  return mesh;
}

}  // namespace focusplan

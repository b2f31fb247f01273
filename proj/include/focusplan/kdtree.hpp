#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include "focusplan/core.hpp"

namespace focusplan {

/// Static KD-tree over 3D points for nearest-neighbor queries.
class KdTree3 {
 public:
  KdTree3() = default;

  explicit KdTree3(std::vector<Vec3> points) : points_(std::move(points)) {
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0u);
    if (!order_.empty()) build(0, order_.size(), 0);
  }

  bool empty() const { return points_.empty(); }
  std::size_t size() const { return points_.size(); }

  struct Nearest {
    std::uint32_t index = 0;
    double distance = std::numeric_limits<double>::infinity();
  };

  Nearest nearest(const Vec3& query) const {
    Nearest best;
    if (!order_.empty()) {
      double best_sq = std::numeric_limits<double>::infinity();
      search(query, 0, order_.size(), 0, best.index, best_sq);
      best.distance = std::sqrt(best_sq);
    }
    return best;
  }

 private:
  void build(std::size_t lo, std::size_t hi, int depth) {
    if (hi - lo <= 1) return;
    const int axis = depth % 3;
    const std::size_t mid = (lo + hi) / 2;
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(lo),
                     order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(hi),
                     [&](std::uint32_t a, std::uint32_t b) {
                       return points_[a][axis] < points_[b][axis];
                     });
    build(lo, mid, depth + 1);
    build(mid + 1, hi, depth + 1);
  }

  void search(const Vec3& query, std::size_t lo, std::size_t hi, int depth, std::uint32_t& best,
              double& best_sq) const {
    if (lo >= hi) return;
    const std::size_t mid = (lo + hi) / 2;
    const Vec3& p = points_[order_[mid]];
    const double d_sq = (p - query).squaredNorm();
    if (d_sq < best_sq) {
      best_sq = d_sq;
      best = order_[mid];
    }
    const int axis = depth % 3;
    const double delta = query[axis] - p[axis];
    const auto near_first = delta < 0.0;
    if (near_first)
      search(query, lo, mid, depth + 1, best, best_sq);
    else
      search(query, mid + 1, hi, depth + 1, best, best_sq);
    if (delta * delta < best_sq) {
      if (near_first)
        search(query, mid + 1, hi, depth + 1, best, best_sq);
      else
        search(query, lo, mid, depth + 1, best, best_sq);
    }
  }

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
};

}  // namespace focusplan

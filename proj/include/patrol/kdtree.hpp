#pragma once

#include "patrol/geometry.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace patrol {

/// Static 3D kd-tree over a point array. The tree keeps its own copy of the
/// points; indices returned by queries refer to the construction order.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::span<const Vec3> points);

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Vec3& point(std::size_t i) const { return points_[i]; }

  /// Index of the closest point and its distance; {-1, inf} on an empty tree.
  std::pair<std::int64_t, double> nearest(const Vec3& q) const;

  /// The k closest points, ordered by increasing distance (ties by index).
  std::vector<std::uint32_t> knn(const Vec3& q, std::size_t k) const;

  /// All points with distance <= radius, sorted by index.
  std::vector<std::uint32_t> radius(const Vec3& q, double r) const;

  /// Number of points with distance <= radius.
  std::size_t count_radius(const Vec3& q, double r) const;

 private:
  struct Node {
    std::uint32_t begin = 0, end = 0;  // range into order_
    std::int32_t left = -1, right = -1;
    std::uint8_t axis = 0;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);

  template <typename Visit>
  void visit_radius(std::int32_t node, const Vec3& q, double r2, Visit&& visit) const;

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;

  static constexpr std::uint32_t kLeafSize = 12;
};

}  // namespace patrol

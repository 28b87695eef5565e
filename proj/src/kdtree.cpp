#include "patrol/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <queue>

namespace patrol {

KdTree::KdTree(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  if (!points_.empty()) root_ = build(0, static_cast<std::uint32_t>(points_.size()));
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  Node node;
  node.begin = begin;
  node.end = end;
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= kLeafSize) return id;

  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double pa = points_[a][axis], pb = points_[b][axis];
                     return pa < pb || (pa == pb && a < b);
                   });
  const double split = points_[order_[mid]][axis];
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  nodes_[id].axis = static_cast<std::uint8_t>(axis);
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

template <typename Visit>
void KdTree::visit_radius(std::int32_t id, const Vec3& q, double r2, Visit&& visit) const {
  const Node& n = nodes_[id];
  if (n.left < 0) {
    for (std::uint32_t i = n.begin; i < n.end; ++i) {
      const std::uint32_t idx = order_[i];
      if ((points_[idx] - q).squaredNorm() <= r2) visit(idx);
    }
    return;
  }
  // left holds coordinates <= split, right holds coordinates >= split
  const double d = q[n.axis] - n.split;
  if (d <= 0.0 || d * d <= r2) visit_radius(n.left, q, r2, visit);
  if (d >= 0.0 || d * d <= r2) visit_radius(n.right, q, r2, visit);
}

std::vector<std::uint32_t> KdTree::radius(const Vec3& q, double r) const {
  std::vector<std::uint32_t> out;
  if (root_ < 0 || r < 0.0) return out;
  visit_radius(root_, q, r * r, [&](std::uint32_t i) { out.push_back(i); });
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t KdTree::count_radius(const Vec3& q, double r) const {
  std::size_t n = 0;
  if (root_ < 0 || r < 0.0) return n;
  visit_radius(root_, q, r * r, [&](std::uint32_t) { ++n; });
  return n;
}

std::vector<std::uint32_t> KdTree::knn(const Vec3& q, std::size_t k) const {
  std::vector<std::uint32_t> out;
  if (root_ < 0 || k == 0) return out;
  k = std::min(k, points_.size());

  using Item = std::pair<double, std::uint32_t>;  // max-heap on (dist2, index)
  std::priority_queue<Item> heap;
  auto consider = [&](std::uint32_t idx) {
    const Item item{(points_[idx] - q).squaredNorm(), idx};
    if (heap.size() < k) {
      heap.push(item);
    } else if (item < heap.top()) {
      heap.pop();
      heap.push(item);
    }
  };
  auto bound = [&] {
    return heap.size() < k ? std::numeric_limits<double>::infinity() : heap.top().first;
  };

  struct Frame {
    std::int32_t id;
    double gap2;
  };
  std::vector<Frame> frames{{root_, 0.0}};
  while (!frames.empty()) {
    const Frame f = frames.back();
    frames.pop_back();
    if (f.gap2 > bound()) continue;
    const Node& n = nodes_[f.id];
    if (n.left < 0) {
      for (std::uint32_t i = n.begin; i < n.end; ++i) consider(order_[i]);
      continue;
    }
    const double d = q[n.axis] - n.split;
    const std::int32_t near = d <= 0.0 ? n.left : n.right;
    const std::int32_t far = d <= 0.0 ? n.right : n.left;
    frames.push_back({far, std::max(f.gap2, d * d)});
    frames.push_back({near, f.gap2});
  }

  out.resize(heap.size());
  for (std::size_t i = heap.size(); i-- > 0;) {
    out[i] = heap.top().second;
    heap.pop();
  }
  return out;
}

std::pair<std::int64_t, double> KdTree::nearest(const Vec3& q) const {
  const auto r = knn(q, 1);
  if (r.empty()) return {-1, std::numeric_limits<double>::infinity()};
  return {r.front(), (points_[r.front()] - q).norm()};
}

}  // namespace patrol

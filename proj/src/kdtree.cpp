#include "mvreg/kdtree.hpp"

#include <algorithm>

namespace mvreg {

namespace {
constexpr std::size_t kLeafSize = 8;
}

KdTree::KdTree(std::span<const Point3> points) : points_(points.begin(), points.end()) {
  order_.resize(points_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  if (!points_.empty()) {
    nodes_.reserve(2 * (points_.size() / kLeafSize + 1));
    build(0, points_.size());
  }
}

std::size_t KdTree::build(std::size_t begin, std::size_t end) {
  const std::size_t id = nodes_.size();
  nodes_.push_back({begin, end});
  if (end - begin <= kLeafSize) return id;

  Eigen::Vector3d lo = points_[order_[begin]];
  Eigen::Vector3d hi = lo;
  for (std::size_t i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] == lo[axis]) return id;  // all coincident, keep as leaf

  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                   order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(end),
                   [&](std::size_t a, std::size_t b) { return points_[a][axis] < points_[b][axis]; });
  const double split = points_[order_[mid]][axis];

  const std::size_t left = build(begin, mid);
  const std::size_t right = build(mid, end);
  Node& node = nodes_[id];
  node.axis = axis;
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

void KdTree::search(std::size_t id, const Point3& q, std::size_t excluded, Neighbor& best) const {
  const Node& node = nodes_[id];
  if (node.axis < 0) {
    for (std::size_t k = node.begin; k < node.end; ++k) {
      const std::size_t idx = order_[k];
      if (idx == excluded) continue;
      const double d2 = (points_[idx] - q).squaredNorm();
      if (d2 < best.squared_distance || (d2 == best.squared_distance && idx < best.index)) {
        best = {idx, d2};
      }
    }
    return;
  }
  // Left holds coordinates <= split, right holds coordinates >= split.
  const double diff = q[node.axis] - node.split;
  const std::size_t near = diff <= 0.0 ? node.left : node.right;
  const std::size_t far = diff <= 0.0 ? node.right : node.left;
  search(near, q, excluded, best);
  if (diff * diff <= best.squared_distance) search(far, q, excluded, best);
}

void KdTree::collect(std::size_t id, const Point3& q, double r2, std::vector<Neighbor>& out) const {
  const Node& node = nodes_[id];
  if (node.axis < 0) {
    for (std::size_t k = node.begin; k < node.end; ++k) {
      const std::size_t idx = order_[k];
      const double d2 = (points_[idx] - q).squaredNorm();
      if (d2 < r2) out.push_back({idx, d2});
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  if (diff <= 0.0 || diff * diff < r2) collect(node.left, q, r2, out);
  if (diff >= 0.0 || diff * diff < r2) collect(node.right, q, r2, out);
}

KdTree::Neighbor KdTree::nearest(const Point3& query) const {
  Neighbor best;
  if (!nodes_.empty()) search(0, query, std::numeric_limits<std::size_t>::max(), best);
  return best;
}

KdTree::Neighbor KdTree::nearest_excluding(const Point3& query, std::size_t excluded) const {
  Neighbor best;
  if (!nodes_.empty()) search(0, query, excluded, best);
  return best;
}

std::vector<KdTree::Neighbor> KdTree::within(const Point3& query, double radius) const {
  std::vector<Neighbor> out;
  if (nodes_.empty() || radius <= 0.0) return out;
  collect(0, query, radius * radius, out);
  std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) { return a.index < b.index; });
  return out;
}

}  // namespace mvreg

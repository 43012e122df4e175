#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "mvreg/geometry.hpp"

namespace mvreg {

/// Exact nearest-neighbour index over a fixed point set.
///
/// Queries return the same answer as a linear scan, including ties: among
/// equidistant points the lowest index wins.
class KdTree {
 public:
  struct Neighbor {
    std::size_t index = std::numeric_limits<std::size_t>::max();
    double squared_distance = std::numeric_limits<double>::infinity();
  };

  KdTree() = default;
  explicit KdTree(std::span<const Point3> points);

  std::size_t size() const { return points_.size(); }

  Neighbor nearest(const Point3& query) const;
  /// Nearest point other than `excluded`.
  Neighbor nearest_excluding(const Point3& query, std::size_t excluded) const;
  /// All points strictly closer than `radius`, ordered by index.
  std::vector<Neighbor> within(const Point3& query, double radius) const;

 private:
  struct Node {
    std::size_t begin = 0;
    std::size_t end = 0;
    int axis = -1;  // -1 for leaves
    double split = 0.0;
    std::size_t left = 0;
    std::size_t right = 0;
  };

  std::size_t build(std::size_t begin, std::size_t end);
  void search(std::size_t node, const Point3& q, std::size_t excluded, Neighbor& best) const;
  void collect(std::size_t node, const Point3& q, double r2, std::vector<Neighbor>& out) const;

  std::vector<Point3> points_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace mvreg

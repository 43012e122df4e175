#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "mvreg/geometry.hpp"
#include "mvreg/kdtree.hpp"

namespace mvreg {

/// Immutable point set with a prebuilt spatial index.
///
/// Copies share the underlying storage. The resolution (mean distance from
/// each point to its closest other point) is computed on first request and
/// cached; concurrent readers are safe.
class PointCloud {
 public:
  PointCloud();
  explicit PointCloud(std::vector<Point3> points);

  std::size_t size() const { return data_->points.size(); }
  bool empty() const { return data_->points.empty(); }
  std::span<const Point3> points() const { return data_->points; }
  const Point3& operator[](std::size_t i) const { return data_->points[i]; }
  const KdTree& index() const { return data_->tree; }

  /// Throws ErrorCode::TooFewPoints for fewer than two points.
  double resolution() const;

  PointCloud transformed(const RigidMotion& m) const;

 private:
  struct Data {
    explicit Data(std::vector<Point3> pts) : points(std::move(pts)), tree(points) {}

    std::vector<Point3> points;
    KdTree tree;
    mutable std::once_flag resolution_once;
    mutable double resolution = 0.0;
  };

  std::shared_ptr<const Data> data_;
};

std::vector<Point3> transform_points(std::span<const Point3> points, const RigidMotion& m);

}  // namespace mvreg

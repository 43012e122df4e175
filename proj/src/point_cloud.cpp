#include "mvreg/point_cloud.hpp"

#include <cmath>
#include <mutex>

#include "mvreg/error.hpp"

namespace mvreg {

PointCloud::PointCloud() : data_(std::make_shared<Data>(std::vector<Point3>{})) {}

PointCloud::PointCloud(std::vector<Point3> points) {
  for (const Point3& p : points) {
    if (!p.allFinite()) throw Error(ErrorCode::InvalidArgument, "point cloud contains a non-finite point");
  }
  data_ = std::make_shared<Data>(std::move(points));
}

double PointCloud::resolution() const {
  if (size() < 2) {
    throw Error(ErrorCode::TooFewPoints, "resolution needs at least two points");
  }
  std::call_once(data_->resolution_once, [this] {
    double sum = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
      sum += std::sqrt(data_->tree.nearest_excluding(data_->points[i], i).squared_distance);
    }
    data_->resolution = sum / static_cast<double>(size());
  });
  if (data_->resolution <= 0.0) {
    throw Error(ErrorCode::DegenerateConfiguration, "all points coincide; resolution is zero");
  }
  return data_->resolution;
}

PointCloud PointCloud::transformed(const RigidMotion& m) const {
  return PointCloud(transform_points(points(), m));
}

std::vector<Point3> transform_points(std::span<const Point3> points, const RigidMotion& m) {
  std::vector<Point3> out;
  out.reserve(points.size());
  for (const Point3& p : points) out.push_back(m.apply(p));
  return out;
}

}  // namespace mvreg

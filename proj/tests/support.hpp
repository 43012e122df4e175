#pragma once

// Shared generators for the test suites. Everything here is test-only and
// built from Eigen primitives rather than the library's own maps.

#include <Eigen/Geometry>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "mvreg/geometry.hpp"

namespace mvreg::testing {

inline Eigen::Vector3d random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Vector3d v;
  do {
    v = {n(rng), n(rng), n(rng)};
  } while (v.norm() < 1e-6);
  return v.normalized();
}

inline Eigen::Matrix3d axis_angle(const Eigen::Vector3d& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

inline Eigen::Matrix3d rot_z(double angle) { return axis_angle(Eigen::Vector3d::UnitZ(), angle); }

inline double deg(double d) { return d * std::numbers::pi / 180.0; }

inline RigidMotion random_motion(std::mt19937_64& rng, double max_angle, double max_shift) {
  std::uniform_real_distribution<double> a(0.0, max_angle);
  std::uniform_real_distribution<double> s(-max_shift, max_shift);
  return {axis_angle(random_unit(rng), a(rng)), Eigen::Vector3d(s(rng), s(rng), s(rng))};
}

inline std::vector<Point3> random_points(std::mt19937_64& rng, std::size_t n, double lo = 0.0,
                                         double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<Point3> pts(n);
  for (auto& p : pts) p = {u(rng), u(rng), u(rng)};
  return pts;
}

inline double max_abs_diff(const RigidMotion& a, const RigidMotion& b) {
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

}  // namespace mvreg::testing

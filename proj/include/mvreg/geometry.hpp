#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>

namespace mvreg {

using Point3 = Eigen::Vector3d;
using Vector6 = Eigen::Matrix<double, 6, 1>;

/// Element of se(3). `omega` is the rotation vector (radians), `nu` the
/// translational part expressed through the left Jacobian.
struct Twist {
  Eigen::Vector3d omega = Eigen::Vector3d::Zero();
  Eigen::Vector3d nu = Eigen::Vector3d::Zero();

  static Twist zero() { return {}; }

  bool operator==(const Twist& other) const = default;
};

/// Element of SE(3). Applying a motion maps p to R * p + t.
///
/// The rotation is kept orthonormal: construction rejects matrices that are
/// more than 1e-9 away from SO(3), and composition snaps back onto SO(3)
/// once accumulated drift exceeds 1e-12.
class RigidMotion {
 public:
  RigidMotion() = default;
  RigidMotion(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

  static RigidMotion identity() { return {}; }
  static RigidMotion from_translation(const Eigen::Vector3d& t);
  static RigidMotion from_rotation(const Eigen::Matrix3d& r);
  static RigidMotion from_axis_angle(const Eigen::Vector3d& axis, double angle,
                                     const Eigen::Vector3d& t = Eigen::Vector3d::Zero());
  /// Accepts a homogeneous matrix whose last row is (0 0 0 1).
  static RigidMotion from_matrix(const Eigen::Matrix4d& m);

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }
  Eigen::Matrix4d matrix() const;

  Point3 apply(const Point3& p) const { return rotation_ * p + translation_; }
  Point3 operator*(const Point3& p) const { return apply(p); }

 private:
  Eigen::Matrix3d rotation_ = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation_ = Eigen::Vector3d::Zero();
};

/// Applies `b` first, then `a`.
RigidMotion compose(const RigidMotion& a, const RigidMotion& b);
inline RigidMotion operator*(const RigidMotion& a, const RigidMotion& b) { return compose(a, b); }

RigidMotion inverse(const RigidMotion& m);

/// Closed-form SE(3) logarithm on the principal branch. Throws
/// ErrorCode::AngleAtBranchCut when the rotation angle is within 1e-6 of pi.
Twist log_map(const RigidMotion& m);
RigidMotion exp_map(const Twist& tw);

Eigen::Matrix3d so3_exp(const Eigen::Vector3d& omega);
Eigen::Vector3d so3_log(const Eigen::Matrix3d& r);
Eigen::Matrix3d hat(const Eigen::Vector3d& v);

/// Packs a twist as [omega; nu].
Vector6 vec(const Twist& tw);
Twist cev(const Vector6& v);

/// Geodesic angle of a rotation matrix, in [0, pi].
double rotation_angle(const Eigen::Matrix3d& r);
/// Angle of a * b^T.
double rotation_distance(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b);
/// Closest rotation in the Frobenius sense (polar factor with det = +1).
Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& m);
double orthonormality_error(const Eigen::Matrix3d& r);

// Transform files hold the 4x4 homogeneous matrix, row-major, one row per
// line, with enough digits that reading back reproduces every double.
std::string format_transform(const RigidMotion& m);
RigidMotion parse_transform(const std::string& text);
void write_transform(const std::filesystem::path& path, const RigidMotion& m);
RigidMotion read_transform(const std::filesystem::path& path);

}  // namespace mvreg

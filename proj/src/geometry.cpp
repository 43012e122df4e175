#include "mvreg/geometry.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <numbers>
#include <sstream>

#include "mvreg/error.hpp"

namespace mvreg {

namespace {

constexpr double kValidityTolerance = 1e-9;
constexpr double kDriftTolerance = 1e-12;
constexpr double kBranchCutMargin = 1e-6;
// Below this angle the Jacobian coefficients are evaluated by series.
constexpr double kSeriesAngle = 0.05;

Eigen::Vector3d vee(const Eigen::Matrix3d& w) {
  return {w(2, 1), w(0, 2), w(1, 0)};
}

struct JacobianCoefficients {
  double b;  // (1 - cos) / theta^2
  double c;  // (theta - sin) / theta^3
  double d;  // (1 - (theta/2) cot(theta/2)) / theta^2, for the inverse
};

JacobianCoefficients jacobian_coefficients(double theta) {
  const double t2 = theta * theta;
  if (theta < kSeriesAngle) {
    const double t4 = t2 * t2;
    const double t6 = t4 * t2;
    return {0.5 - t2 / 24.0 + t4 / 720.0 - t6 / 40320.0,
            1.0 / 6.0 - t2 / 120.0 + t4 / 5040.0 - t6 / 362880.0,
            1.0 / 12.0 + t2 / 720.0 + t4 / 30240.0 + t6 / 1209600.0};
  }
  const double half = 0.5 * theta;
  const double s_half = std::sin(half);
  return {2.0 * s_half * s_half / t2, (theta - std::sin(theta)) / (t2 * theta),
          (1.0 - half * std::cos(half) / s_half) / t2};
}

}  // namespace

RigidMotion::RigidMotion(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
    : rotation_(rotation), translation_(translation) {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "rigid motion has non-finite entries");
  }
  if (orthonormality_error(rotation) > kValidityTolerance ||
      std::abs(rotation.determinant() - 1.0) > kValidityTolerance) {
    throw Error(ErrorCode::InvalidArgument, "matrix is not a proper rotation");
  }
}

RigidMotion RigidMotion::from_translation(const Eigen::Vector3d& t) {
  return {Eigen::Matrix3d::Identity(), t};
}

RigidMotion RigidMotion::from_rotation(const Eigen::Matrix3d& r) {
  return {r, Eigen::Vector3d::Zero()};
}

RigidMotion RigidMotion::from_axis_angle(const Eigen::Vector3d& axis, double angle,
                                         const Eigen::Vector3d& t) {
  return {Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix(), t};
}

RigidMotion RigidMotion::from_matrix(const Eigen::Matrix4d& m) {
  const Eigen::RowVector4d bottom = m.row(3);
  if ((bottom - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > kValidityTolerance) {
    throw Error(ErrorCode::InvalidArgument, "last row of a homogeneous transform must be 0 0 0 1");
  }
  return {m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
}

Eigen::Matrix4d RigidMotion::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

RigidMotion compose(const RigidMotion& a, const RigidMotion& b) {
  Eigen::Matrix3d r = a.rotation() * b.rotation();
  if (orthonormality_error(r) > kDriftTolerance) {
    r = nearest_rotation(r);
  }
  return {r, a.rotation() * b.translation() + a.translation()};
}

RigidMotion inverse(const RigidMotion& m) {
  const Eigen::Matrix3d rt = m.rotation().transpose();
  return {rt, -(rt * m.translation())};
}

Eigen::Matrix3d hat(const Eigen::Vector3d& v) {
  Eigen::Matrix3d w;
  w << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return w;
}

Eigen::Matrix3d so3_exp(const Eigen::Vector3d& omega) {
  const double theta = omega.norm();
  const Eigen::Matrix3d w = hat(omega);
  const JacobianCoefficients k = jacobian_coefficients(theta);
  // sin(theta)/theta
  const double a = theta < kSeriesAngle
                       ? 1.0 - theta * theta / 6.0 + std::pow(theta, 4) / 120.0 - std::pow(theta, 6) / 5040.0
                       : std::sin(theta) / theta;
  return Eigen::Matrix3d::Identity() + a * w + k.b * w * w;
}

Eigen::Vector3d so3_log(const Eigen::Matrix3d& r) {
  const Eigen::Vector3d s = 0.5 * vee(r - r.transpose());  // sin(theta) * axis
  const double cos_theta = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
  const double sin_theta = s.norm();
  const double theta = std::atan2(sin_theta, cos_theta);

  if (theta < kSeriesAngle) {
    const double t2 = theta * theta;
    return s * (1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0 + 31.0 * t2 * t2 * t2 / 15120.0);
  }
  if (theta < std::numbers::pi - 1e-3) {
    return s * (theta / sin_theta);
  }
  // Near pi the skew part vanishes; recover the axis from the symmetric part
  // (1 - cos) a a^T and take its sign from the skew part.
  const Eigen::Matrix3d b = 0.5 * (r + r.transpose()) - cos_theta * Eigen::Matrix3d::Identity();
  Eigen::Index k = 0;
  b.diagonal().maxCoeff(&k);
  Eigen::Vector3d axis = b.col(k) / std::sqrt(b(k, k) * (1.0 - cos_theta));
  if (axis.dot(s) < 0.0) axis = -axis;
  return theta * axis.normalized();
}

Twist log_map(const RigidMotion& m) {
  const double theta = rotation_angle(m.rotation());
  if (theta > std::numbers::pi - kBranchCutMargin) {
    throw Error(ErrorCode::AngleAtBranchCut,
                fmt::format("rotation angle {} is at the logarithm branch cut", theta));
  }
  Twist tw;
  tw.omega = so3_log(m.rotation());
  const Eigen::Matrix3d w = hat(tw.omega);
  const JacobianCoefficients k = jacobian_coefficients(tw.omega.norm());
  const Eigen::Matrix3d v_inv = Eigen::Matrix3d::Identity() - 0.5 * w + k.d * w * w;
  tw.nu = v_inv * m.translation();
  return tw;
}

RigidMotion exp_map(const Twist& tw) {
  const Eigen::Matrix3d w = hat(tw.omega);
  const JacobianCoefficients k = jacobian_coefficients(tw.omega.norm());
  const Eigen::Matrix3d v = Eigen::Matrix3d::Identity() + k.b * w + k.c * w * w;
  Eigen::Matrix3d r = so3_exp(tw.omega);
  if (orthonormality_error(r) > kDriftTolerance) {
    r = nearest_rotation(r);
  }
  return {r, v * tw.nu};
}

Vector6 vec(const Twist& tw) {
  Vector6 v;
  v << tw.omega, tw.nu;
  return v;
}

Twist cev(const Vector6& v) {
  return {v.head<3>(), v.tail<3>()};
}

double rotation_angle(const Eigen::Matrix3d& r) {
  const double sin_theta = 0.5 * vee(r - r.transpose()).norm();
  const double cos_theta = 0.5 * (r.trace() - 1.0);
  return std::atan2(sin_theta, cos_theta);
}

double rotation_distance(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  if (a == b) return 0.0;  // a * a^T is only identity up to rounding
  return rotation_angle(a * b.transpose());
}

Eigen::Matrix3d nearest_rotation(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d v = svd.matrixV();
  Eigen::Vector3d d(1.0, 1.0, (u * v.transpose()).determinant() < 0.0 ? -1.0 : 1.0);
  return u * d.asDiagonal() * v.transpose();
}

double orthonormality_error(const Eigen::Matrix3d& r) {
  return (r.transpose() * r - Eigen::Matrix3d::Identity()).norm();
}

std::string format_transform(const RigidMotion& m) {
  const Eigen::Matrix4d h = m.matrix();
  std::string out;
  for (int row = 0; row < 4; ++row) {
    out += fmt::format("{} {} {} {}\n", h(row, 0), h(row, 1), h(row, 2), h(row, 3));
  }
  return out;
}

RigidMotion parse_transform(const std::string& text) {
  std::istringstream in(text);
  Eigen::Matrix4d h;
  for (int row = 0; row < 4; ++row) {
    for (int col = 0; col < 4; ++col) {
      if (!(in >> h(row, col))) {
        throw Error(ErrorCode::InvalidArgument, "transform must contain 16 numbers");
      }
    }
  }
  std::string extra;
  if (in >> extra) {
    throw Error(ErrorCode::InvalidArgument, "trailing data after 4x4 transform");
  }
  return RigidMotion::from_matrix(h);
}

void write_transform(const std::filesystem::path& path, const RigidMotion& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << format_transform(m);
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

RigidMotion read_transform(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_transform(buffer.str());
}

}  // namespace mvreg

#include "mvreg/registration.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>

#include "mvreg/error.hpp"

namespace mvreg {

namespace {

constexpr double kRankTolerance = 1e-10;

std::vector<Point3> gather(std::span<const Point3> points, std::span<const Correspondence> corrs,
                           bool source_side) {
  std::vector<Point3> out;
  out.reserve(corrs.size());
  for (const Correspondence& c : corrs) {
    out.push_back(points[source_side ? c.source_index : c.target_index]);
  }
  return out;
}

double mean_squared(std::span<const Correspondence> corrs) {
  if (corrs.empty()) return 0.0;
  double sum = 0.0;
  for (const Correspondence& c : corrs) sum += c.distance * c.distance;
  return sum / static_cast<double>(corrs.size());
}

bool same_pairs(std::span<const Correspondence> a, std::span<const Correspondence> b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end(), [](const auto& x, const auto& y) {
    return x.source_index == y.source_index && x.target_index == y.target_index;
  });
}

// Correspondences used for fitting: the coincident ones, or, when fewer than
// the minimum overlap fraction are coincident, the closest min_overlap * N_t.
std::vector<Correspondence> retain(std::span<const Correspondence> corrs, double cutoff,
                                   double min_overlap) {
  std::vector<Correspondence> kept;
  for (const Correspondence& c : corrs) {
    if (c.distance <= cutoff) kept.push_back(c);
  }
  const std::size_t needed = std::max(
      std::min<std::size_t>(3, corrs.size()),
      static_cast<std::size_t>(std::ceil(min_overlap * static_cast<double>(corrs.size()))));
  if (kept.size() >= needed) return kept;

  kept.assign(corrs.begin(), corrs.end());
  std::stable_sort(kept.begin(), kept.end(),
                   [](const Correspondence& a, const Correspondence& b) { return a.distance < b.distance; });
  kept.resize(needed);
  std::sort(kept.begin(), kept.end(),
            [](const Correspondence& a, const Correspondence& b) { return a.source_index < b.source_index; });
  return kept;
}

}  // namespace

void IcpConfig::validate() const {
  if (!(range_accuracy > 0.0) || max_iterations <= 0 || !(coincidence_factor > 0.0) ||
      !(min_overlap > 0.0) || min_overlap > 1.0) {
    throw Error(ErrorCode::InvalidArgument,
                "ICP configuration needs positive range accuracy, iterations and coincidence factor, "
                "and min_overlap in (0, 1]");
  }
}

double estimate_resolution(const PointCloud& cloud) { return cloud.resolution(); }

std::vector<Correspondence> nearest_neighbors(std::span<const Point3> source, const PointCloud& target) {
  if (target.empty()) throw Error(ErrorCode::EmptyTarget, "nearest-neighbour target is empty");
  std::vector<Correspondence> out(source.size());
  for (std::size_t i = 0; i < source.size(); ++i) {
    const KdTree::Neighbor n = target.index().nearest(source[i]);
    out[i] = {i, n.index, std::sqrt(n.squared_distance)};
  }
  return out;
}

std::vector<Correspondence> nearest_neighbors(const PointCloud& source, const PointCloud& target) {
  return nearest_neighbors(source.points(), target);
}

std::size_t count_coincident(std::span<const Correspondence> corrs, double resolution, double factor) {
  if (!(resolution > 0.0)) throw Error(ErrorCode::InvalidArgument, "resolution must be positive");
  const double cutoff = factor * resolution;
  return static_cast<std::size_t>(std::count_if(
      corrs.begin(), corrs.end(), [cutoff](const Correspondence& c) { return c.distance <= cutoff; }));
}

double adaptive_threshold(std::size_t coincident, std::size_t total, double resolution,
                          double range_accuracy) {
  if (total == 0 || coincident > total || !(resolution > 0.0) || !(range_accuracy >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("adaptive threshold needs 0 <= N_p <= N_t, N_t > 0, L_r > 0, R_e >= 0 "
                            "(got N_p={}, N_t={}, L_r={}, R_e={})",
                            coincident, total, resolution, range_accuracy));
  }
  const double missing = 1.0 - static_cast<double>(coincident) / static_cast<double>(total);
  const double radius = missing * (std::sqrt(2.0) / 2.0) * resolution;
  return radius * radius + range_accuracy * range_accuracy;
}

RigidMotion fit_rigid(std::span<const Point3> source, std::span<const Point3> target) {
  if (source.size() != target.size()) {
    throw Error(ErrorCode::ShapeMismatch, "fit_rigid needs paired point lists");
  }
  if (source.size() < 3) {
    throw Error(ErrorCode::DegenerateConfiguration, "rigid fit needs at least three pairs");
  }
  const double n = static_cast<double>(source.size());
  Eigen::Vector3d src_mean = Eigen::Vector3d::Zero();
  Eigen::Vector3d dst_mean = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < source.size(); ++i) {
    src_mean += source[i];
    dst_mean += target[i];
  }
  src_mean /= n;
  dst_mean /= n;

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < source.size(); ++i) {
    cov += (source[i] - src_mean) * (target[i] - dst_mean).transpose();
  }

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d s = svd.singularValues();
  if (!(s(0) > 0.0) || s(1) <= kRankTolerance * s(0)) {
    throw Error(ErrorCode::DegenerateConfiguration, "correspondences are collinear or coincident");
  }
  const Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d v = svd.matrixV();
  const double det = (v * u.transpose()).determinant();
  if (det < 0.0 && s(1) - s(2) <= kRankTolerance * s(0)) {
    throw Error(ErrorCode::DegenerateConfiguration, "reflection correction is ambiguous");
  }
  const Eigen::Vector3d d(1.0, 1.0, det < 0.0 ? -1.0 : 1.0);
  Eigen::Matrix3d r = v * d.asDiagonal() * u.transpose();
  r = nearest_rotation(r);
  return {r, dst_mean - r * src_mean};
}

RigidMotion fit_rigid(std::span<const Correspondence> corrs, const PointCloud& source,
                      const PointCloud& target) {
  const std::vector<Point3> src = gather(source.points(), corrs, true);
  const std::vector<Point3> dst = gather(target.points(), corrs, false);
  return fit_rigid(src, dst);
}

IcpResult icp_adaptive(const PointCloud& source, const PointCloud& target, const RigidMotion& init,
                       const IcpConfig& cfg) {
  cfg.validate();
  if (target.empty()) throw Error(ErrorCode::EmptyTarget, "ICP target is empty");
  if (source.size() < 3) throw Error(ErrorCode::TooFewPoints, "ICP source needs at least three points");

  const double resolution = target.resolution();
  const double cutoff = cfg.coincidence_factor * resolution;
  const std::size_t total = source.size();

  IcpResult result;
  result.motion = init;
  std::vector<Correspondence> previous;

  // Matches the current pose, updates the statistics and reports whether
  // the adaptive criterion holds.
  auto evaluate = [&](std::vector<Point3>& moved, std::vector<Correspondence>& kept) {
    moved = transform_points(source.points(), result.motion);
    const std::vector<Correspondence> corrs = nearest_neighbors(moved, target);
    const std::size_t coincident = count_coincident(corrs, resolution, cfg.coincidence_factor);
    kept = retain(corrs, cutoff, cfg.min_overlap);
    const double mse = mean_squared(kept);
    result.threshold = adaptive_threshold(coincident, total, resolution, cfg.range_accuracy);
    result.overlap_rate = static_cast<double>(coincident) / static_cast<double>(total);
    result.final_rms = std::sqrt(mse);
    result.mse_history.push_back(mse);
    return result.overlap_rate >= cfg.min_overlap && mse <= result.threshold;
  };

  std::vector<Point3> moved;
  std::vector<Correspondence> kept;
  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    result.iterations_used = iter;
    if (evaluate(moved, kept)) {
      result.converged = true;
      return result;
    }
    if (iter > 1 && same_pairs(kept, previous)) {
      // Same pairs as the last fit: the pose is already their optimum.
      return result;
    }
    const std::vector<Point3> src = gather(moved, kept, true);
    const std::vector<Point3> dst = gather(target.points(), kept, false);
    result.motion = compose(fit_rigid(src, dst), result.motion);
    previous = std::move(kept);
  }
  result.converged = evaluate(moved, kept);
  return result;
}

IcpResult icp_classic(const PointCloud& source, const PointCloud& target, const RigidMotion& init,
                      const ClassicIcpConfig& cfg) {
  if (cfg.max_iterations <= 0 || !(cfg.relative_tolerance >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "classic ICP needs positive iterations and tolerance >= 0");
  }
  if (target.empty()) throw Error(ErrorCode::EmptyTarget, "ICP target is empty");

  const double resolution = target.resolution();
  IcpResult result;
  result.motion = init;
  double previous_mse = std::numeric_limits<double>::infinity();
  for (int iter = 1; iter <= cfg.max_iterations; ++iter) {
    result.iterations_used = iter;
    const std::vector<Point3> moved = transform_points(source.points(), result.motion);
    const std::vector<Correspondence> corrs = nearest_neighbors(moved, target);
    const double mse = mean_squared(corrs);
    result.mse_history.push_back(mse);
    result.final_rms = std::sqrt(mse);
    result.overlap_rate = static_cast<double>(count_coincident(corrs, resolution, IcpConfig{}.coincidence_factor)) /
                          static_cast<double>(corrs.size());
    if (mse == 0.0 || (iter > 1 && previous_mse - mse <= cfg.relative_tolerance * previous_mse)) {
      result.converged = true;
      break;
    }
    previous_mse = mse;
    const std::vector<Point3> dst = gather(target.points(), corrs, false);
    result.motion = compose(fit_rigid(moved, dst), result.motion);
  }
  return result;
}

}  // namespace mvreg

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mvreg/geometry.hpp"
#include "mvreg/point_cloud.hpp"

namespace mvreg {

struct Correspondence {
  std::size_t source_index = 0;
  std::size_t target_index = 0;
  double distance = 0.0;
};

struct IcpConfig {
  /// Range accuracy of the acquisition system R_e, in model units.
  double range_accuracy = 1e-4;
  int max_iterations = 50;
  /// Correspondences within coincidence_factor * L_r count as coincident.
  double coincidence_factor = 2.0;
  /// Smallest overlap fraction at which a pair is considered registrable.
  double min_overlap = 0.5;

  void validate() const;
};

struct IcpResult {
  RigidMotion motion;
  double final_rms = 0.0;
  double overlap_rate = 0.0;
  int iterations_used = 0;
  bool converged = false;
  /// Adaptive threshold e_thr evaluated at exit (squared model units).
  double threshold = 0.0;
  /// Mean squared distance of the retained correspondences, per iteration.
  std::vector<double> mse_history;
};

double estimate_resolution(const PointCloud& cloud);

/// One correspondence per source point, matched to its closest target point
/// (lowest index on ties). Throws ErrorCode::EmptyTarget.
std::vector<Correspondence> nearest_neighbors(std::span<const Point3> source, const PointCloud& target);
std::vector<Correspondence> nearest_neighbors(const PointCloud& source, const PointCloud& target);

/// Number of correspondences no farther than factor * resolution.
std::size_t count_coincident(std::span<const Correspondence> corrs, double resolution, double factor);

/// e_thr = [(1 - N_p/N_t) * (sqrt(2)/2) * L_r]^2 + R_e^2.
double adaptive_threshold(std::size_t coincident, std::size_t total, double resolution,
                          double range_accuracy);

/// Least-squares rigid motion taking source[i] onto target[i]. Throws
/// ErrorCode::DegenerateConfiguration for fewer than three pairs or a
/// collinear/ambiguous configuration.
RigidMotion fit_rigid(std::span<const Point3> source, std::span<const Point3> target);
RigidMotion fit_rigid(std::span<const Correspondence> corrs, const PointCloud& source,
                      const PointCloud& target);

/// ICP stopped by the overlap-aware adaptive threshold. The returned motion
/// maps the original source into the target frame.
IcpResult icp_adaptive(const PointCloud& source, const PointCloud& target, const RigidMotion& init,
                       const IcpConfig& cfg);

struct ClassicIcpConfig {
  int max_iterations = 50;
  /// Stop once the relative decrease of the mean squared distance is below this.
  double relative_tolerance = 1e-6;
};

/// Plain point-to-point ICP over all correspondences, used as the baseline.
IcpResult icp_classic(const PointCloud& source, const PointCloud& target, const RigidMotion& init,
                      const ClassicIcpConfig& cfg);

}  // namespace mvreg

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "mvreg/motion_averaging.hpp"
#include "mvreg/point_cloud.hpp"
#include "mvreg/registration.hpp"

namespace mvreg {

enum class PairwiseMethod { Adaptive, Classic };

struct PipelineConfig {
  /// Ordered pairs enter the averaging when their overlap exceeds this.
  double overlap_gate = 0.5;
  int outer_iterations = 10;
  /// Stop once no view rotates by more than this between outer iterations (rad).
  double outer_tolerance = 1e-5;
  PairwiseMethod pairwise = PairwiseMethod::Adaptive;
  IcpConfig icp;
  ClassicIcpConfig classic;
  AveragingOptions averaging;
  /// Worker threads for the pairwise stage; 0 picks the hardware count.
  unsigned threads = 1;

  void validate() const;
};

using ViewPair = std::pair<std::size_t, std::size_t>;

struct RegistrationReport {
  ViewGraph graph;
  /// e^k per outer iteration: largest rotation change of any view (rad).
  std::vector<double> error_history;
  /// Objective after each outer iteration.
  std::vector<double> objective_history;
  double objective = 0.0;
  /// overlap(i, j) as used by the last gating step.
  Eigen::MatrixXd overlap;
  /// Ordered pairs that passed the last gating step.
  std::vector<ViewPair> pairs;
  int outer_iterations = 0;
  double seconds = 0.0;
};

/// Fraction of `a` points (placed by `ma`) whose nearest neighbour in `b`
/// (placed by `mb`) lies within factor * resolution(b).
double compute_overlap(const PointCloud& a, const RigidMotion& ma, const PointCloud& b, const RigidMotion& mb,
                       double factor = 2.0);

/// All ordered-pair overlaps under the graph's global motions; zero diagonal.
Eigen::MatrixXd overlap_matrix(std::span<const PointCloud> clouds, const ViewGraph& graph, double factor = 2.0);

/// Ordered pairs (i, j), i != j, with overlap(i, j) > gate.
std::vector<ViewPair> gate_pairs(const Eigen::MatrixXd& overlap, double gate);

/// Largest rotation angle of R_next * R_prev^T over all views.
double iteration_error(const ViewGraph& previous, const ViewGraph& next);

/// Mean over `pairs` of the mean squared distance of coincident
/// correspondences (view i points matched into view j, both in the reference
/// frame). A pair without coincident points contributes 0; no pairs gives 0.
double objective_value(std::span<const PointCloud> clouds, const ViewGraph& graph, std::span<const ViewPair> pairs,
                       double factor = 2.0);

/// Same, over the pairs gated by the graph itself.
double objective_value(std::span<const PointCloud> clouds, const ViewGraph& graph, const PipelineConfig& cfg);

/// Right-multiplies every non-anchor rotation by exp of a rotation vector with
/// components uniform in [-level, level]; translations are kept.
ViewGraph perturb_graph(const ViewGraph& graph, double level, std::uint64_t seed);

/// Gating, all-pairs ICP and motion averaging, repeated until the views stop
/// moving or the outer iteration budget runs out.
RegistrationReport register_multiview(std::span<const PointCloud> clouds, const ViewGraph& init,
                                      const PipelineConfig& cfg);

/// Baseline: each view registered to its predecessor with classic ICP and
/// the relative motions chained from view 0. Reported pairs are the
/// consecutive ones.
RegistrationReport register_chained(std::span<const PointCloud> clouds, const ViewGraph& init,
                                    const PipelineConfig& cfg);

}  // namespace mvreg

#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <vector>

#include "mvreg/geometry.hpp"

namespace mvreg {

/// Measured relative motion between views i and j. Under the convention
/// used throughout, global motions map view coordinates into the reference
/// frame and a graph is consistent when M_i * M_ij * M_j^-1 = I, so M_ij
/// maps view-j coordinates into view i.
struct RelativeMotion {
  std::size_t i = 0;
  std::size_t j = 0;
  RigidMotion motion;
};

struct ViewGraph {
  std::vector<RigidMotion> global_motions;
  std::vector<RelativeMotion> edges;

  static ViewGraph with_views(std::size_t count);

  std::size_t view_count() const { return global_motions.size(); }

  /// Adds an edge; rejects self loops, out-of-range indices and repeats of an
  /// ordered pair. (i, j) and (j, i) are distinct measurements.
  void add_edge(std::size_t i, std::size_t j, const RigidMotion& motion);
  bool connected() const;
  /// Checks size, gauge anchoring and edge validity.
  void validate() const;
  /// Re-expresses all global motions relative to view 0 so that it becomes
  /// the identity; edges are unchanged.
  ViewGraph anchored() const;
};

/// Stacked linear system for one averaging round. Each 6-row block of
/// `incidence` has -I at view i and +I at view j, with the anchored view 0
/// omitted; `corrections` stacks vec(log(M_i M_ij M_j^-1)).
struct IncidenceSystem {
  Eigen::MatrixXd incidence;
  Eigen::VectorXd corrections;
};

Eigen::MatrixXd build_incidence(std::size_t view_count, std::span<const RelativeMotion> edges);
IncidenceSystem build_incidence_system(const ViewGraph& graph);

Twist edge_correction(const ViewGraph& graph, const RelativeMotion& edge);

/// Least-squares solution of incidence * x = corrections; one twist per
/// non-anchor view. Throws ErrorCode::RankDeficient when the system does not
/// determine every view.
std::vector<Twist> solve_corrections(const IncidenceSystem& system);

/// Left-multiplies view k (k >= 1) by exp(corrections[k-1]).
ViewGraph apply_corrections(const ViewGraph& graph, std::span<const Twist> corrections);

struct AveragingOptions {
  double epsilon = 1e-6;
  int max_rounds = 20;

  void validate() const;
};

struct AveragingResult {
  ViewGraph graph;
  int rounds = 0;
  /// Norm of the stacked correction vector, one entry per round.
  std::vector<double> correction_norms;
};

AveragingResult motion_average(const ViewGraph& graph, const AveragingOptions& options = {});

/// Sum over edges of the squared norm of the edge correction twist.
double consistency_error(const ViewGraph& graph);

}  // namespace mvreg

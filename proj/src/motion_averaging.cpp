#include "mvreg/motion_averaging.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <fmt/format.h>
#include <numeric>

#include "mvreg/error.hpp"

namespace mvreg {

namespace {

constexpr double kAnchorTolerance = 1e-12;

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

Eigen::VectorXd stacked_corrections(const ViewGraph& graph) {
  Eigen::VectorXd v(6 * static_cast<Eigen::Index>(graph.edges.size()));
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    v.segment<6>(6 * static_cast<Eigen::Index>(e)) = vec(edge_correction(graph, graph.edges[e]));
  }
  return v;
}

std::vector<Twist> unstack(const Eigen::VectorXd& x) {
  std::vector<Twist> out;
  out.reserve(static_cast<std::size_t>(x.size() / 6));
  for (Eigen::Index k = 0; k < x.size(); k += 6) out.push_back(cev(x.segment<6>(k)));
  return out;
}

Eigen::VectorXd solve_with(const Eigen::ColPivHouseholderQR<Eigen::MatrixXd>& qr,
                           const Eigen::VectorXd& rhs) {
  return qr.solve(rhs);
}

Eigen::ColPivHouseholderQR<Eigen::MatrixXd> factorize(const Eigen::MatrixXd& d) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d);
  if (d.cols() == 0 || qr.rank() < d.cols()) {
    throw Error(ErrorCode::RankDeficient,
                fmt::format("incidence system has rank {} but {} unknowns; the view graph is "
                            "not connected",
                            qr.rank(), d.cols()));
  }
  return qr;
}

bool is_identity(const RigidMotion& m) {
  return (m.rotation() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= kAnchorTolerance &&
         m.translation().cwiseAbs().maxCoeff() <= kAnchorTolerance;
}

}  // namespace

ViewGraph ViewGraph::with_views(std::size_t count) {
  ViewGraph g;
  g.global_motions.assign(count, RigidMotion::identity());
  return g;
}

void ViewGraph::add_edge(std::size_t i, std::size_t j, const RigidMotion& motion) {
  if (i == j || i >= view_count() || j >= view_count()) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("invalid edge ({}, {}) for {} views", i, j, view_count()));
  }
  const bool duplicate = std::any_of(edges.begin(), edges.end(),
                                     [&](const RelativeMotion& e) { return e.i == i && e.j == j; });
  if (duplicate) throw Error(ErrorCode::InvalidArgument, fmt::format("duplicate edge ({}, {})", i, j));
  edges.push_back({i, j, motion});
}

bool ViewGraph::connected() const {
  if (view_count() == 0) return false;
  std::vector<std::size_t> parent(view_count());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  std::size_t components = view_count();
  for (const RelativeMotion& e : edges) {
    const std::size_t a = find_root(parent, e.i);
    const std::size_t b = find_root(parent, e.j);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components == 1;
}

void ViewGraph::validate() const {
  if (view_count() < 2) throw Error(ErrorCode::InvalidArgument, "a view graph needs at least two views");
  if (!is_identity(global_motions.front())) {
    throw Error(ErrorCode::InvalidArgument, "global motion of view 0 must be the identity");
  }
  for (std::size_t a = 0; a < edges.size(); ++a) {
    const RelativeMotion& e = edges[a];
    if (e.i == e.j || e.i >= view_count() || e.j >= view_count()) {
      throw Error(ErrorCode::InvalidArgument, fmt::format("invalid edge ({}, {})", e.i, e.j));
    }
    for (std::size_t b = a + 1; b < edges.size(); ++b) {
      if (edges[b].i == e.i && edges[b].j == e.j) {
        throw Error(ErrorCode::InvalidArgument, fmt::format("duplicate edge ({}, {})", e.i, e.j));
      }
    }
  }
}

ViewGraph ViewGraph::anchored() const {
  ViewGraph g = *this;
  if (g.global_motions.empty()) return g;
  const RigidMotion rebase = inverse(global_motions.front());
  for (RigidMotion& m : g.global_motions) m = compose(rebase, m);
  g.global_motions.front() = RigidMotion::identity();
  return g;
}

Eigen::MatrixXd build_incidence(std::size_t view_count, std::span<const RelativeMotion> edges) {
  const auto unknowns = view_count == 0 ? Eigen::Index{0} : 6 * static_cast<Eigen::Index>(view_count - 1);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(6 * static_cast<Eigen::Index>(edges.size()), unknowns);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Eigen::Index row = 6 * static_cast<Eigen::Index>(e);
    if (edges[e].i > 0) {
      d.block<6, 6>(row, 6 * static_cast<Eigen::Index>(edges[e].i - 1)) = -Eigen::Matrix<double, 6, 6>::Identity();
    }
    if (edges[e].j > 0) {
      d.block<6, 6>(row, 6 * static_cast<Eigen::Index>(edges[e].j - 1)) = Eigen::Matrix<double, 6, 6>::Identity();
    }
  }
  return d;
}

IncidenceSystem build_incidence_system(const ViewGraph& graph) {
  return {build_incidence(graph.view_count(), graph.edges), stacked_corrections(graph)};
}

Twist edge_correction(const ViewGraph& graph, const RelativeMotion& edge) {
  if (edge.i >= graph.view_count() || edge.j >= graph.view_count()) {
    throw Error(ErrorCode::InvalidArgument, "edge index out of range");
  }
  const RigidMotion delta =
      compose(compose(graph.global_motions[edge.i], edge.motion), inverse(graph.global_motions[edge.j]));
  return log_map(delta);
}

std::vector<Twist> solve_corrections(const IncidenceSystem& system) {
  if (system.incidence.rows() != system.corrections.size()) {
    throw Error(ErrorCode::ShapeMismatch, "incidence rows and correction length differ");
  }
  return unstack(solve_with(factorize(system.incidence), system.corrections));
}

ViewGraph apply_corrections(const ViewGraph& graph, std::span<const Twist> corrections) {
  if (graph.view_count() == 0 || corrections.size() != graph.view_count() - 1) {
    throw Error(ErrorCode::ShapeMismatch,
                fmt::format("expected {} corrections, got {}", graph.view_count() - 1, corrections.size()));
  }
  ViewGraph out = graph;
  for (std::size_t k = 1; k < out.view_count(); ++k) {
    out.global_motions[k] = compose(exp_map(corrections[k - 1]), graph.global_motions[k]);
  }
  return out;
}

void AveragingOptions::validate() const {
  if (!(epsilon > 0.0) || max_rounds <= 0) {
    throw Error(ErrorCode::InvalidArgument, "averaging needs epsilon > 0 and max_rounds > 0");
  }
}

AveragingResult motion_average(const ViewGraph& graph, const AveragingOptions& options) {
  options.validate();
  graph.validate();
  if (!graph.connected()) {
    throw Error(ErrorCode::RankDeficient, "view graph is not connected");
  }
  // The edge set is fixed, so the incidence matrix is factored once.
  const auto qr = factorize(build_incidence(graph.view_count(), graph.edges));

  AveragingResult result{graph, 0, {}};
  for (int round = 1; round <= options.max_rounds; ++round) {
    const Eigen::VectorXd x = solve_with(qr, stacked_corrections(result.graph));
    result.graph = apply_corrections(result.graph, unstack(x));
    result.rounds = round;
    result.correction_norms.push_back(x.norm());
    if (x.norm() < options.epsilon) break;
  }
  return result;
}

double consistency_error(const ViewGraph& graph) {
  double total = 0.0;
  for (const RelativeMotion& e : graph.edges) total += vec(edge_correction(graph, e)).squaredNorm();
  return total;
}

}  // namespace mvreg

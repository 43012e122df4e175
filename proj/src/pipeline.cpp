#include "mvreg/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fmt/format.h>
#include <random>

#include "mvreg/error.hpp"
#include "parallel.hpp"

namespace mvreg {

namespace {

std::vector<PointCloud> placed(std::span<const PointCloud> clouds, const ViewGraph& graph) {
  std::vector<PointCloud> out;
  out.reserve(clouds.size());
  for (std::size_t k = 0; k < clouds.size(); ++k) out.push_back(clouds[k].transformed(graph.global_motions[k]));
  return out;
}

double overlap_of_placed(const PointCloud& a, const PointCloud& b, double factor) {
  if (a.empty()) return 0.0;
  const auto corrs = nearest_neighbors(a, b);
  return static_cast<double>(count_coincident(corrs, b.resolution(), factor)) / static_cast<double>(a.size());
}

double coincident_mse(const PointCloud& a, const PointCloud& b, double factor) {
  const double cutoff = factor * b.resolution();
  double sum = 0.0;
  std::size_t count = 0;
  for (const Correspondence& c : nearest_neighbors(a, b)) {
    if (c.distance <= cutoff) {
      sum += c.distance * c.distance;
      ++count;
    }
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

void check_inputs(std::span<const PointCloud> clouds, const ViewGraph& init) {
  if (clouds.size() < 2) throw Error(ErrorCode::InvalidArgument, "registration needs at least two clouds");
  if (init.view_count() != clouds.size()) {
    throw Error(ErrorCode::ShapeMismatch,
                fmt::format("{} clouds but {} global motions", clouds.size(), init.view_count()));
  }
  for (std::size_t k = 0; k < clouds.size(); ++k) {
    if (clouds[k].size() < 3) throw Error(ErrorCode::TooFewPoints, fmt::format("cloud {} has fewer than 3 points", k));
  }
}

bool pairs_connected(std::size_t views, std::span<const ViewPair> pairs) {
  ViewGraph g = ViewGraph::with_views(views);
  for (const auto& [i, j] : pairs) g.edges.push_back({i, j, RigidMotion::identity()});
  return g.connected();
}

RigidMotion pairwise(const PointCloud& source, const PointCloud& target, const RigidMotion& init,
                     const PipelineConfig& cfg) {
  if (cfg.pairwise == PairwiseMethod::Classic) return icp_classic(source, target, init, cfg.classic).motion;
  return icp_adaptive(source, target, init, cfg.icp).motion;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

void PipelineConfig::validate() const {
  if (!(overlap_gate > 0.0 && overlap_gate <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("overlap gate must lie in (0, 1], got {}", overlap_gate));
  }
  if (outer_iterations <= 0) throw Error(ErrorCode::InvalidArgument, "outer_iterations must be positive");
  if (!(outer_tolerance > 0.0)) throw Error(ErrorCode::InvalidArgument, "outer_tolerance must be positive");
  icp.validate();
  averaging.validate();
  if (classic.max_iterations <= 0 || !(classic.relative_tolerance >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "classic ICP needs positive iterations and tolerance >= 0");
  }
}

double compute_overlap(const PointCloud& a, const RigidMotion& ma, const PointCloud& b, const RigidMotion& mb,
                       double factor) {
  if (!(factor > 0.0)) throw Error(ErrorCode::InvalidArgument, "coincidence factor must be positive");
  return overlap_of_placed(a.transformed(ma), b.transformed(mb), factor);
}

Eigen::MatrixXd overlap_matrix(std::span<const PointCloud> clouds, const ViewGraph& graph, double factor) {
  check_inputs(clouds, graph);
  if (!(factor > 0.0)) throw Error(ErrorCode::InvalidArgument, "coincidence factor must be positive");
  const std::vector<PointCloud> world = placed(clouds, graph);
  const auto n = static_cast<Eigen::Index>(clouds.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j) {
        out(i, j) = overlap_of_placed(world[static_cast<std::size_t>(i)], world[static_cast<std::size_t>(j)], factor);
      }
    }
  }
  return out;
}

std::vector<ViewPair> gate_pairs(const Eigen::MatrixXd& overlap, double gate) {
  std::vector<ViewPair> out;
  for (Eigen::Index i = 0; i < overlap.rows(); ++i) {
    for (Eigen::Index j = 0; j < overlap.cols(); ++j) {
      if (i != j && overlap(i, j) > gate) out.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
  }
  return out;
}

double iteration_error(const ViewGraph& previous, const ViewGraph& next) {
  if (previous.view_count() != next.view_count()) {
    throw Error(ErrorCode::ShapeMismatch,
                fmt::format("graphs have {} and {} views", previous.view_count(), next.view_count()));
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < next.view_count(); ++k) {
    worst = std::max(worst, rotation_distance(next.global_motions[k].rotation(), previous.global_motions[k].rotation()));
  }
  return worst;
}

double objective_value(std::span<const PointCloud> clouds, const ViewGraph& graph, std::span<const ViewPair> pairs,
                       double factor) {
  check_inputs(clouds, graph);
  if (pairs.empty()) return 0.0;
  const std::vector<PointCloud> world = placed(clouds, graph);
  double sum = 0.0;
  for (const auto& [i, j] : pairs) {
    if (i >= clouds.size() || j >= clouds.size() || i == j) {
      throw Error(ErrorCode::InvalidArgument, fmt::format("invalid pair ({}, {})", i, j));
    }
    sum += coincident_mse(world[i], world[j], factor);
  }
  return sum / static_cast<double>(pairs.size());
}

double objective_value(std::span<const PointCloud> clouds, const ViewGraph& graph, const PipelineConfig& cfg) {
  const auto pairs = gate_pairs(overlap_matrix(clouds, graph, cfg.icp.coincidence_factor), cfg.overlap_gate);
  return objective_value(clouds, graph, pairs, cfg.icp.coincidence_factor);
}

ViewGraph perturb_graph(const ViewGraph& graph, double level, std::uint64_t seed) {
  if (!(level >= 0.0)) throw Error(ErrorCode::InvalidArgument, "perturbation level must be >= 0");
  ViewGraph out = graph;
  if (level == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> noise(-level, level);
  for (std::size_t k = 1; k < out.view_count(); ++k) {
    Eigen::Vector3d omega;
    for (int a = 0; a < 3; ++a) omega(a) = noise(rng);
    const RigidMotion& m = out.global_motions[k];
    out.global_motions[k] = RigidMotion(m.rotation() * so3_exp(omega), m.translation());
  }
  return out;
}

RegistrationReport register_multiview(std::span<const PointCloud> clouds, const ViewGraph& init,
                                      const PipelineConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  cfg.validate();
  check_inputs(clouds, init);
  init.validate();

  RegistrationReport report;
  ViewGraph current = init;
  current.edges.clear();
  for (int outer = 1; outer <= cfg.outer_iterations; ++outer) {
    report.overlap = overlap_matrix(clouds, current, cfg.icp.coincidence_factor);
    report.pairs = gate_pairs(report.overlap, cfg.overlap_gate);
    if (!pairs_connected(clouds.size(), report.pairs)) {
      throw Error(ErrorCode::DisconnectedAfterGating,
                  fmt::format("only {} ordered pairs exceed overlap {} and they do not link every view",
                              report.pairs.size(), cfg.overlap_gate));
    }

    // Edge (i, j) maps view j into view i: register P_j onto P_i from the
    // prediction of the current global motions.
    std::vector<RigidMotion> relative(report.pairs.size());
    detail::parallel_for(report.pairs.size(), cfg.threads, [&](std::size_t e) {
      const auto [i, j] = report.pairs[e];
      const RigidMotion predicted = compose(inverse(current.global_motions[i]), current.global_motions[j]);
      relative[e] = pairwise(clouds[j], clouds[i], predicted, cfg);
    });

    ViewGraph measured = current;
    measured.edges.clear();
    for (std::size_t e = 0; e < report.pairs.size(); ++e) {
      measured.add_edge(report.pairs[e].first, report.pairs[e].second, relative[e]);
    }
    ViewGraph next = motion_average(measured, cfg.averaging).graph;
    const double change = iteration_error(current, next);
    current = std::move(next);
    report.error_history.push_back(change);
    report.objective_history.push_back(objective_value(clouds, current, report.pairs, cfg.icp.coincidence_factor));
    report.outer_iterations = outer;
    if (change <= cfg.outer_tolerance) break;
  }
  report.graph = std::move(current);
  report.objective = report.objective_history.back();
  report.seconds = seconds_since(start);
  return report;
}

RegistrationReport register_chained(std::span<const PointCloud> clouds, const ViewGraph& init,
                                    const PipelineConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  cfg.validate();
  check_inputs(clouds, init);
  init.validate();

  RegistrationReport report;
  ViewGraph current = init;
  current.edges.clear();
  for (std::size_t k = 1; k < clouds.size(); ++k) {
    const RigidMotion predicted = compose(inverse(current.global_motions[k - 1]), current.global_motions[k]);
    const RigidMotion step = icp_classic(clouds[k], clouds[k - 1], predicted, cfg.classic).motion;
    current.add_edge(k - 1, k, step);
    current.global_motions[k] = compose(current.global_motions[k - 1], step);
    report.pairs.emplace_back(k - 1, k);
  }
  report.overlap = overlap_matrix(clouds, current, cfg.icp.coincidence_factor);
  report.error_history.push_back(iteration_error(init, current));
  report.objective = objective_value(clouds, current, report.pairs, cfg.icp.coincidence_factor);
  report.objective_history.push_back(report.objective);
  report.outer_iterations = 1;
  report.graph = std::move(current);
  report.seconds = seconds_since(start);
  return report;
}

}  // namespace mvreg

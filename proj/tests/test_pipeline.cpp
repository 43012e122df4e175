#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "mvreg/error.hpp"
#include "mvreg/pipeline.hpp"
#include "mvreg/synthetic.hpp"
#include "support.hpp"

using namespace mvreg;
using namespace mvreg::testing;

namespace {

ViewGraph truth_graph(const synthetic::Scene& scene) {
  ViewGraph g = ViewGraph::with_views(scene.truth.size());
  g.global_motions = scene.truth;
  return g;
}

synthetic::Scene noiseless_scene(std::size_t views, double spacing, std::uint64_t seed = 1,
                                 double visibility = -0.25) {
  synthetic::SceneSpec spec;
  spec.visibility = visibility;
  spec.views = views;
  spec.view_spacing = spacing;
  spec.object_points = 2500;
  spec.noise_fraction = 0.0;
  spec.shared_samples = true;
  spec.seed = seed;
  return synthetic::make_scene(spec);
}

double max_rotation_error(const ViewGraph& g, const std::vector<RigidMotion>& truth) {
  double worst = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    worst = std::max(worst, rotation_distance(g.global_motions[k].rotation(), truth[k].rotation()));
  }
  return worst;
}

double angle_of(const Eigen::Matrix3d& r) {
  return std::acos(std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0));
}

// Brute-force mean squared distance of coincident nearest neighbours.
double brute_pair_objective(const std::vector<Point3>& a, const std::vector<Point3>& b, double cutoff) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& p : a) {
    double best = INFINITY;
    for (const auto& q : b) best = std::min(best, (p - q).squaredNorm());
    if (std::sqrt(best) <= cutoff) {
      sum += best;
      ++count;
    }
  }
  return count ? sum / static_cast<double>(count) : 0.0;
}

double brute_resolution(const std::vector<Point3>& pts) {
  double sum = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double best = INFINITY;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (i != j) best = std::min(best, (pts[i] - pts[j]).squaredNorm());
    }
    sum += std::sqrt(best);
  }
  return sum / static_cast<double>(pts.size());
}

}  // namespace

TEST_CASE("compute_overlap examples") {
  const auto pts = synthetic::sample_blob(4000, 1.0, Eigen::Matrix3d::Identity());
  const PointCloud cloud(pts);
  const RigidMotion id;
  CHECK(compute_overlap(cloud, id, cloud, id) == 1.0);

  const double far = 1000.0 * cloud.resolution();
  CHECK(compute_overlap(cloud, id, cloud, RigidMotion::from_translation({far, 0, 0})) == 0.0);

  // Half-space crop: the points of the full cloud that land on the crop are
  // the crop itself plus a band about 2 resolutions wide at the cut.
  std::vector<Point3> half;
  for (const auto& p : pts) {
    if (p.x() > 0.05) half.push_back(p);
  }
  const double fraction = static_cast<double>(half.size()) / static_cast<double>(pts.size());
  CHECK(fraction > 0.4);
  CHECK(fraction < 0.6);
  CHECK(std::abs(compute_overlap(cloud, id, PointCloud(half), id) - fraction) < 0.05);
  CHECK(compute_overlap(PointCloud(half), id, cloud, id) == 1.0);

  // Moving both clouds together changes nothing.
  const RigidMotion g(axis_angle({1, 2, 3}, 0.8), {3, -1, 2});
  CHECK(compute_overlap(cloud, g, PointCloud(half), g) ==
        doctest::Approx(compute_overlap(cloud, id, PointCloud(half), id)).epsilon(1e-12));
}

TEST_CASE("iteration_error") {
  std::mt19937_64 rng(6);
  ViewGraph a = ViewGraph::with_views(4);
  for (std::size_t k = 1; k < 4; ++k) a.global_motions[k] = random_motion(rng, 3.0, 1.0);
  CHECK(iteration_error(a, a) == 0.0);

  ViewGraph b = a;
  b.global_motions[2] = compose(RigidMotion::from_rotation(axis_angle({0, 1, 1}, 0.1)), a.global_motions[2]);
  CHECK(iteration_error(a, b) == doctest::Approx(0.1).epsilon(1e-12));

  for (int trial = 0; trial < 100; ++trial) {
    ViewGraph c = a;
    double expected = 0.0;
    for (std::size_t k = 1; k < 4; ++k) {
      c.global_motions[k] = compose(a.global_motions[k], random_motion(rng, 0.3, 0.1));
      expected = std::max(expected,
                          angle_of(c.global_motions[k].rotation() * a.global_motions[k].rotation().transpose()));
    }
    CHECK(std::abs(iteration_error(a, c) - expected) < 1e-7);
  }
  try {
    iteration_error(a, ViewGraph::with_views(3));
    FAIL("expected ShapeMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ShapeMismatch);
  }
}

TEST_CASE("objective_value") {
  const auto pts = synthetic::sample_blob(1500, 1.0, Eigen::Matrix3d::Identity());
  const std::vector<PointCloud> dup = {PointCloud(pts), PointCloud(pts)};
  ViewGraph g = ViewGraph::with_views(2);
  const std::vector<ViewPair> both = {{0, 1}, {1, 0}};
  CHECK(objective_value(dup, g, both) == 0.0);
  CHECK(objective_value(dup, g, std::vector<ViewPair>{}) == 0.0);

  const double lr = dup[0].resolution();
  const double delta = 0.1 * lr;
  g.global_motions[1] = RigidMotion::from_translation({delta, 0, 0});
  CHECK(objective_value(dup, g, both) == doctest::Approx(delta * delta).epsilon(1e-9));
  CHECK(objective_value(dup, g, PipelineConfig{}) == doctest::Approx(delta * delta).epsilon(1e-9));

  std::mt19937_64 rng(12);
  const synthetic::Scene scene = noiseless_scene(3, 0.9, 4);
  ViewGraph moved = truth_graph(scene);
  for (std::size_t k = 1; k < 3; ++k) moved.global_motions[k] = compose(moved.global_motions[k], random_motion(rng, 0.02, 0.01));
  const std::vector<ViewPair> pairs = {{0, 1}, {1, 2}, {2, 0}, {1, 0}};
  double expected = 0.0;
  for (const auto& [i, j] : pairs) {
    const auto a = transform_points(scene.clouds[i].points(), moved.global_motions[i]);
    const auto b = transform_points(scene.clouds[j].points(), moved.global_motions[j]);
    expected += brute_pair_objective(a, b, 2.0 * brute_resolution(b));
  }
  expected /= static_cast<double>(pairs.size());
  CHECK(objective_value(scene.clouds, moved, pairs) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("perturb_graph") {
  std::mt19937_64 rng(2);
  ViewGraph g = ViewGraph::with_views(5);
  for (std::size_t k = 1; k < 5; ++k) g.global_motions[k] = random_motion(rng, 3.0, 1.0);

  const ViewGraph same = perturb_graph(g, 0.0, 9);
  for (std::size_t k = 0; k < 5; ++k) CHECK(same.global_motions[k].matrix() == g.global_motions[k].matrix());

  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const ViewGraph p = perturb_graph(g, 0.02, seed);
    CHECK(p.global_motions[0].matrix() == g.global_motions[0].matrix());
    for (std::size_t k = 1; k < 5; ++k) {
      CHECK(rotation_distance(p.global_motions[k].rotation(), g.global_motions[k].rotation()) <= 0.02 * std::sqrt(3.0) + 1e-12);
      CHECK(p.global_motions[k].translation() == g.global_motions[k].translation());
    }
    const ViewGraph q = perturb_graph(g, 0.02, seed);
    for (std::size_t k = 0; k < 5; ++k) CHECK(p.global_motions[k].matrix() == q.global_motions[k].matrix());
  }
  CHECK(perturb_graph(g, 0.02, 1).global_motions[1].matrix() != perturb_graph(g, 0.02, 2).global_motions[1].matrix());
  CHECK_THROWS_AS(perturb_graph(g, -1.0, 0), Error);
}

TEST_CASE("register_multiview on identical clouds") {
  const PointCloud cloud(synthetic::sample_blob(800, 1.0, Eigen::Matrix3d::Identity()));
  const std::vector<PointCloud> clouds = {cloud, cloud, cloud};
  const RegistrationReport r = register_multiview(clouds, ViewGraph::with_views(3), PipelineConfig{});
  CHECK(r.outer_iterations == 1);
  CHECK(r.error_history.size() == 1);
  CHECK(r.error_history[0] == 0.0);
  for (const auto& m : r.graph.global_motions) CHECK(max_abs_diff(m, RigidMotion::identity()) < 1e-12);
  CHECK(r.pairs.size() == 6);
  CHECK(r.objective == 0.0);
}

TEST_CASE("register_multiview recovers a perturbed noiseless scan set") {
  // Every view sees the whole object: pairwise ICP is exact at the truth.
  const synthetic::Scene full = noiseless_scene(4, 1.0, 1, -1.5);
  const ViewGraph full_truth = truth_graph(full);
  PipelineConfig exact;
  exact.icp.range_accuracy = 1e-9;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const ViewGraph init = perturb_graph(full_truth, 0.02, seed);
    const RegistrationReport r = register_multiview(full.clouds, init, exact);
    CHECK(max_rotation_error(r.graph, full.truth) < 1e-6);
    CHECK(r.objective < 1e-12);
    double previous = objective_value(full.clouds, init, r.pairs);
    for (double o : r.objective_history) {
      CHECK((o <= previous || o < 1e-24));  // below 1e-24 it is rounding
      previous = o;
    }
  }

  // Partial views: source points beyond the target's edge match onto its
  // boundary, which biases each pair by about a milliradian.
  const synthetic::Scene scene = noiseless_scene(4, 1.0);
  const ViewGraph truth = truth_graph(scene);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const ViewGraph init = perturb_graph(truth, 0.02, seed);
    const double before = max_rotation_error(init, scene.truth);
    const RegistrationReport r = register_multiview(scene.clouds, init, PipelineConfig{});
    const double after = max_rotation_error(r.graph, scene.truth);
    CHECK(after < before);
    CHECK(after < 0.01);
    CHECK(r.objective < objective_value(scene.clouds, init, r.pairs));
    CHECK(r.outer_iterations <= PipelineConfig{}.outer_iterations);
    CHECK(r.error_history.size() == static_cast<std::size_t>(r.outer_iterations));
    CHECK(r.graph.global_motions[0].matrix() == RigidMotion::identity().matrix());
    for (double e : r.error_history) CHECK(std::isfinite(e));
  }
}

TEST_CASE("register_multiview fixed point and thread independence") {
  const synthetic::Scene full = noiseless_scene(4, 1.0, 7, -1.5);
  const RegistrationReport exact = register_multiview(full.clouds, truth_graph(full), PipelineConfig{});
  CHECK(max_rotation_error(exact.graph, full.truth) < 1e-6);
  CHECK(exact.outer_iterations == 1);

  const synthetic::Scene scene = noiseless_scene(4, 1.0, 7);
  const RegistrationReport partial = register_multiview(scene.clouds, truth_graph(scene), PipelineConfig{});
  CHECK(max_rotation_error(partial.graph, scene.truth) < 0.01);

  synthetic::SceneSpec noisy;
  noisy.views = 4;
  noisy.object_points = 2000;
  noisy.seed = 3;
  const synthetic::Scene ns = synthetic::make_scene(noisy);
  const ViewGraph init = perturb_graph(truth_graph(ns), 0.03, 5);
  PipelineConfig one, four;
  four.threads = 4;
  const RegistrationReport a = register_multiview(ns.clouds, init, one);
  const RegistrationReport b = register_multiview(ns.clouds, init, four);
  for (std::size_t k = 0; k < 4; ++k) CHECK(a.graph.global_motions[k].matrix() == b.graph.global_motions[k].matrix());
  CHECK(a.error_history == b.error_history);
  CHECK(a.objective == b.objective);
}

TEST_CASE("gating drops weak pairs and fails when nothing links a view") {
  // Axes 1.3 rad apart: neighbours overlap well, views 0 and 2 barely.
  const synthetic::Scene scene = noiseless_scene(3, 1.3, 2);
  const ViewGraph truth = truth_graph(scene);
  const Eigen::MatrixXd ov = overlap_matrix(scene.clouds, truth);
  REQUIRE(ov(0, 1) > 0.5);
  REQUIRE(ov(1, 2) > 0.5);
  REQUIRE(ov(0, 2) < 0.5);
  REQUIRE(ov(2, 0) < 0.5);
  const ViewGraph init = perturb_graph(truth, 0.02, 8);
  const RegistrationReport r = register_multiview(scene.clouds, init, PipelineConfig{});
  for (const auto& [i, j] : r.pairs) CHECK(std::max(i, j) - std::min(i, j) == 1);
  CHECK(max_rotation_error(r.graph, scene.truth) < max_rotation_error(init, scene.truth));

  PipelineConfig strict;
  strict.overlap_gate = 0.999;
  try {
    register_multiview(scene.clouds, init, strict);
    FAIL("expected DisconnectedAfterGating");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DisconnectedAfterGating);
  }
}

TEST_CASE("pipeline input checks") {
  const PointCloud cloud(synthetic::sample_blob(200, 1.0, Eigen::Matrix3d::Identity()));
  const std::vector<PointCloud> two = {cloud, cloud};
  CHECK_THROWS_AS(register_multiview(std::vector<PointCloud>{cloud}, ViewGraph::with_views(1), PipelineConfig{}), Error);
  CHECK_THROWS_AS(register_multiview(two, ViewGraph::with_views(3), PipelineConfig{}), Error);
  PipelineConfig bad;
  bad.overlap_gate = 0.0;
  CHECK_THROWS_AS(register_multiview(two, ViewGraph::with_views(2), bad), Error);
  bad = PipelineConfig{};
  bad.outer_iterations = 0;
  CHECK_THROWS_AS(register_multiview(two, ViewGraph::with_views(2), bad), Error);
}

TEST_CASE("chained baseline") {
  const synthetic::Scene scene = noiseless_scene(4, 1.0);
  const ViewGraph init = perturb_graph(truth_graph(scene), 0.02, 4);
  const RegistrationReport r = register_chained(scene.clouds, init, PipelineConfig{});
  REQUIRE(r.pairs.size() == 3);
  REQUIRE(r.graph.edges.size() == 3);
  CHECK(r.graph.global_motions[0].matrix() == RigidMotion::identity().matrix());
  for (std::size_t k = 1; k < 4; ++k) {
    CHECK(r.pairs[k - 1] == ViewPair{k - 1, k});
    const RigidMotion chained = compose(r.graph.global_motions[k - 1], r.graph.edges[k - 1].motion);
    CHECK(max_abs_diff(chained, r.graph.global_motions[k]) < 1e-12);
  }
  CHECK(consistency_error(r.graph) < 1e-20);

  // On full views the classic fit is exact too.
  const synthetic::Scene full = noiseless_scene(4, 1.0, 1, -1.5);
  PipelineConfig exact;
  exact.classic.relative_tolerance = 0.0;
  const RegistrationReport f = register_chained(full.clouds, perturb_graph(truth_graph(full), 0.02, 4), exact);
  CHECK(max_rotation_error(f.graph, full.truth) < 1e-6);
}

#include <doctest.h>

#include <algorithm>
#include <random>

#include "mvreg/error.hpp"
#include "mvreg/motion_averaging.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace mvreg;
using namespace mvreg::testing;

namespace {

// Random global motions with view 0 at the identity.
std::vector<RigidMotion> random_globals(std::mt19937_64& rng, std::size_t views) {
  std::vector<RigidMotion> out{RigidMotion::identity()};
  for (std::size_t k = 1; k < views; ++k) out.push_back(random_motion(rng, 2.0, 1.0));
  return out;
}

ViewGraph consistent_graph(const std::vector<RigidMotion>& globals,
                           const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  ViewGraph g;
  g.global_motions = globals;
  for (const auto& [i, j] : edges) g.add_edge(i, j, compose(inverse(globals[i]), globals[j]));
  return g;
}

double max_twist_norm(const ViewGraph& g) {
  double worst = 0.0;
  for (const auto& e : g.edges) worst = std::max(worst, vec(edge_correction(g, e)).norm());
  return worst;
}

Eigen::Vector3d uniform_rotation_noise(std::mt19937_64& rng, double level) {
  std::uniform_real_distribution<double> u(-level, level);
  return {u(rng), u(rng), u(rng)};
}

}  // namespace

TEST_CASE("edge_correction examples") {
  std::mt19937_64 rng(4);
  const auto globals = random_globals(rng, 4);
  const ViewGraph g = consistent_graph(globals, {{0, 1}, {1, 2}, {3, 2}, {0, 3}});
  for (const auto& e : g.edges) CHECK(vec(edge_correction(g, e)).norm() < 1e-12);

  ViewGraph two = ViewGraph::with_views(2);
  two.add_edge(0, 1, RigidMotion::from_translation({1, 0, 0}));
  const Twist t = edge_correction(two, two.edges[0]);
  CHECK(t.omega.norm() == 0.0);
  CHECK((t.nu - Eigen::Vector3d(1, 0, 0)).norm() < 1e-15);
}

TEST_CASE("edge_correction to first order in a perturbation") {
  std::mt19937_64 rng(9);
  const double eps = 1e-4;
  for (int trial = 0; trial < 20; ++trial) {
    const auto globals = random_globals(rng, 4);
    ViewGraph g = consistent_graph(globals, {{0, 1}, {1, 2}, {2, 3}, {3, 1}});
    const std::size_t pick = static_cast<std::size_t>(trial) % g.edges.size();
    Vector6 w;
    w << random_unit(rng), random_unit(rng);
    w.normalize();
    RelativeMotion& e = g.edges[pick];
    // Perturbing M_ij on the left by exp(eps w) shows up conjugated by M_i.
    e.motion = compose(exp_map(cev(eps * w)), e.motion);
    const Twist got = edge_correction(g, e);

    const RigidMotion& mi = globals[e.i];
    Eigen::Matrix<double, 6, 6> adjoint = Eigen::Matrix<double, 6, 6>::Zero();
    adjoint.block<3, 3>(0, 0) = mi.rotation();
    adjoint.block<3, 3>(3, 3) = mi.rotation();
    adjoint.block<3, 3>(3, 0) = hat(mi.translation()) * mi.rotation();
    const Vector6 expected = adjoint * (eps * w);
    CHECK((vec(got) - expected).norm() < 10 * eps * eps);
    if (e.i == 0) CHECK((vec(got) - eps * w).norm() < 1e-12);
  }
}

TEST_CASE("build_incidence block structure") {
  const std::vector<RelativeMotion> edges = {{0, 1, {}}, {2, 1, {}}, {1, 3, {}}};
  const Eigen::MatrixXd d = build_incidence(4, edges);
  CHECK(d.rows() == 18);
  CHECK(d.cols() == 18);
  CHECK((d - dense_incidence(4, {{0, 1}, {2, 1}, {1, 3}})).cwiseAbs().maxCoeff() == 0.0);
  for (Eigen::Index r = 0; r < d.rows(); ++r) {
    const double nonzero = d.row(r).cwiseAbs().sum();
    CHECK(nonzero == (r < 6 ? 1.0 : 2.0));
  }
}

TEST_CASE("solve_corrections examples") {
  SUBCASE("zero right-hand side") {
    const IncidenceSystem sys{dense_incidence(3, {{0, 1}, {1, 2}}), Eigen::VectorXd::Zero(12)};
    for (const Twist& t : solve_corrections(sys)) CHECK(vec(t).norm() == 0.0);
  }
  SUBCASE("single edge") {
    Vector6 v;
    v << 0.1, -0.2, 0.3, 1.0, 2.0, -3.0;
    const auto x = solve_corrections({dense_incidence(2, {{0, 1}}), v});
    REQUIRE(x.size() == 1);
    CHECK((vec(x[0]) - v).norm() < 1e-15);
  }
  SUBCASE("consistent right-hand side is recovered") {
    std::mt19937_64 rng(11);
    const auto edges = std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 2}, {2, 3}, {3, 0}, {1, 3}};
    const Eigen::MatrixXd d = dense_incidence(4, edges);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::VectorXd truth(18);
    for (Eigen::Index k = 0; k < truth.size(); ++k) truth(k) = n(rng);
    const auto x = solve_corrections({d, d * truth});
    for (std::size_t k = 0; k < 3; ++k) {
      CHECK((vec(x[k]) - truth.segment<6>(static_cast<Eigen::Index>(6 * k))).norm() < 1e-9);
    }
  }
}

TEST_CASE("solve_corrections matches the SVD pseudo-inverse") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> n(0.0, 1.0);
  int systems = 0;
  for (std::size_t views = 2; views <= 6; ++views) {
    for (std::size_t count = views - 1; count <= std::min<std::size_t>(10, views * (views - 1)); ++count) {
      for (int rep = 0; rep < 5; ++rep) {
        const auto edges = random_connected_edges(rng, views, count);
        const Eigen::MatrixXd d = dense_incidence(views, edges);
        Eigen::VectorXd b(d.rows());
        for (Eigen::Index k = 0; k < b.size(); ++k) b(k) = n(rng);
        const Eigen::VectorXd oracle = pinv_solve(d, b);
        const auto x = solve_corrections({d, b});
        REQUIRE(x.size() == views - 1);
        for (std::size_t k = 0; k + 1 < views; ++k) {
          CHECK((vec(x[k]) - oracle.segment<6>(static_cast<Eigen::Index>(6 * k))).cwiseAbs().maxCoeff() < 1e-9);
        }
        ++systems;
      }
    }
  }
  CHECK(systems > 100);
}

TEST_CASE("solve_corrections errors") {
  // Views 2 and 3 are not linked to the anchor.
  const IncidenceSystem cut{dense_incidence(4, {{0, 1}, {2, 3}}), Eigen::VectorXd::Zero(12)};
  try {
    solve_corrections(cut);
    FAIL("expected RankDeficient");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RankDeficient);
  }
  CHECK_THROWS_AS(solve_corrections({dense_incidence(2, {{0, 1}}), Eigen::VectorXd::Zero(5)}), Error);
}

TEST_CASE("apply_corrections") {
  std::mt19937_64 rng(5);
  const auto globals = random_globals(rng, 4);
  ViewGraph g = consistent_graph(globals, {{0, 1}, {1, 2}, {2, 3}});

  const std::vector<Twist> zero(3, Twist::zero());
  const ViewGraph same = apply_corrections(g, zero);
  for (std::size_t k = 0; k < 4; ++k) CHECK(max_abs_diff(same.global_motions[k], g.global_motions[k]) == 0.0);

  const auto target = random_globals(rng, 4);
  std::vector<Twist> exact;
  for (std::size_t k = 1; k < 4; ++k) exact.push_back(log_map(compose(target[k], inverse(g.global_motions[k]))));
  const ViewGraph moved = apply_corrections(g, exact);
  CHECK(max_abs_diff(moved.global_motions[0], RigidMotion::identity()) == 0.0);
  for (std::size_t k = 1; k < 4; ++k) CHECK(max_abs_diff(moved.global_motions[k], target[k]) < 1e-12);

  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Twist> small, back;
    std::normal_distribution<double> n(0.0, 0.05);
    for (int k = 0; k < 3; ++k) {
      Vector6 v;
      for (int c = 0; c < 6; ++c) v(c) = n(rng);
      small.push_back(cev(v));
      back.push_back(cev(-v));
    }
    const ViewGraph round = apply_corrections(apply_corrections(g, small), back);
    for (std::size_t k = 0; k < 4; ++k) CHECK(max_abs_diff(round.global_motions[k], g.global_motions[k]) < 1e-9);
  }
  CHECK_THROWS_AS(apply_corrections(g, std::span<const Twist>(zero).first(2)), Error);
}

TEST_CASE("motion_average fixed point and single edge") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto globals = random_globals(rng, 5);
    const ViewGraph g = consistent_graph(globals, random_connected_edges(rng, 5, 8));
    const AveragingResult r = motion_average(g);
    CHECK(r.rounds == 1);
    CHECK(r.correction_norms.front() < 1e-9);
    for (std::size_t k = 0; k < 5; ++k) CHECK(max_abs_diff(r.graph.global_motions[k], globals[k]) < 1e-9);
  }

  ViewGraph two = ViewGraph::with_views(2);
  const RigidMotion measured(axis_angle({1, 1, 0}, 0.7), {0.3, -0.2, 1.0});
  two.add_edge(0, 1, measured);
  const AveragingResult r = motion_average(two);
  CHECK(max_abs_diff(r.graph.global_motions[1], measured) < 1e-12);
  CHECK(consistency_error(r.graph) < 1e-24);
}

TEST_CASE("one round strictly reduces the consistency error") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const auto globals = random_globals(rng, 5);
    ViewGraph g = consistent_graph(globals, random_connected_edges(rng, 5, 8));
    RelativeMotion& e = g.edges[static_cast<std::size_t>(trial) % g.edges.size()];
    e.motion = compose(e.motion, random_motion(rng, 0.05, 0.05));
    const double before = consistency_error(g);
    AveragingOptions one;
    one.max_rounds = 1;
    const double after = consistency_error(motion_average(g, one).graph);
    CHECK(after < before);
  }
}

TEST_CASE("averaging a noisy 5-view cycle beats chaining") {
  std::mt19937_64 rng(77);
  int wins = 0;
  const int trials = 50;
  double chained_total = 0.0, averaged_total = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    const auto truth = random_globals(rng, 5);
    ViewGraph g = ViewGraph::with_views(5);
    for (std::size_t k = 0; k < 5; ++k) {
      const std::size_t next = (k + 1) % 5;
      const RigidMotion exact = compose(inverse(truth[k]), truth[next]);
      const RigidMotion noise = RigidMotion::from_rotation(so3_exp(uniform_rotation_noise(rng, 0.02)));
      g.add_edge(k, next, compose(exact, noise));
    }
    // Greedy chain along the first four edges.
    for (std::size_t k = 1; k < 5; ++k) g.global_motions[k] = compose(g.global_motions[k - 1], g.edges[k - 1].motion);
    auto total_error = [&](const ViewGraph& v) {
      double sum = 0.0;
      for (std::size_t k = 1; k < 5; ++k) sum += rotation_distance(v.global_motions[k].rotation(), truth[k].rotation());
      return sum;
    };
    const double chained = total_error(g);
    const double averaged = total_error(motion_average(g).graph);
    if (averaged < chained) ++wins;
    chained_total += chained;
    averaged_total += averaged;
  }
  MESSAGE("averaging wins " << wins << "/" << trials);
  // Per view k the chain accumulates k noise terms while the cycle solution
  // has variance k(5-k)/5 of one term, so the summed error drops to roughly
  // 0.65 of the chain's in expectation; a single trial still loses about 12%
  // of the time (2000-trial estimate), which caps the win rate near 88%.
  CHECK(wins >= 40);
  CHECK(averaged_total < 0.8 * chained_total);
}

TEST_CASE("gauge, validation and determinism") {
  std::mt19937_64 rng(3);
  const auto globals = random_globals(rng, 4);
  ViewGraph g = consistent_graph(globals, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
  g.edges[1].motion = compose(g.edges[1].motion, random_motion(rng, 0.1, 0.1));
  const AveragingResult a = motion_average(g);
  const AveragingResult b = motion_average(g);
  CHECK(a.graph.global_motions[0].matrix() == RigidMotion::identity().matrix());
  for (std::size_t k = 0; k < 4; ++k) CHECK(a.graph.global_motions[k].matrix() == b.graph.global_motions[k].matrix());
  CHECK(a.correction_norms == b.correction_norms);
  CHECK(a.rounds <= 10);
  CHECK(a.correction_norms.back() < AveragingOptions{}.epsilon);

  ViewGraph shifted = g;
  const RigidMotion base = random_motion(rng, 1.0, 1.0);
  for (auto& m : shifted.global_motions) m = compose(base, m);
  CHECK_THROWS_AS(motion_average(shifted), Error);
  const ViewGraph re = shifted.anchored();
  for (std::size_t k = 0; k < 4; ++k) CHECK(max_abs_diff(re.global_motions[k], g.global_motions[k]) < 1e-12);

  ViewGraph cut = ViewGraph::with_views(4);
  cut.add_edge(0, 1, {});
  cut.add_edge(2, 3, {});
  CHECK_FALSE(cut.connected());
  try {
    motion_average(cut);
    FAIL("expected RankDeficient");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RankDeficient);
  }

  ViewGraph dup = ViewGraph::with_views(3);
  dup.add_edge(0, 1, {});
  dup.add_edge(1, 0, {});
  CHECK_THROWS_AS(dup.add_edge(0, 1, {}), Error);
  CHECK_THROWS_AS(dup.add_edge(1, 1, {}), Error);
  CHECK_THROWS_AS(dup.add_edge(0, 3, {}), Error);
  CHECK_THROWS_AS(ViewGraph::with_views(1).validate(), Error);
  AveragingOptions bad;
  bad.epsilon = 0.0;
  CHECK_THROWS_AS(motion_average(g, bad), Error);
}

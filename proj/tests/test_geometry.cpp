#include <random>

#include "doctest.h"
#include "mvreg/error.hpp"
#include "mvreg/geometry.hpp"
#include "support.hpp"

using namespace mvreg;
using namespace mvreg::testing;

TEST_CASE("compose") {
  CHECK(max_abs_diff(compose(RigidMotion::identity(), RigidMotion::identity()), RigidMotion::identity()) == 0.0);

  const RigidMotion a = RigidMotion::from_rotation(rot_z(deg(30)));
  const RigidMotion b = RigidMotion::from_rotation(rot_z(deg(60)));
  CHECK(max_abs_diff(compose(a, b), RigidMotion::from_rotation(rot_z(deg(90)))) < 1e-12);

  // b is applied first
  const RigidMotion r = RigidMotion::from_rotation(rot_z(deg(90)));
  const RigidMotion t = RigidMotion::from_translation({1, 0, 0});
  const Point3 p = compose(r, t).apply(Point3::Zero());
  CHECK((p - Point3(0, 1, 0)).norm() < 1e-12);
}

TEST_CASE("inverse") {
  CHECK(max_abs_diff(inverse(RigidMotion::identity()), RigidMotion::identity()) == 0.0);
  const RigidMotion inv_t = inverse(RigidMotion::from_translation({1, 2, 3}));
  CHECK((inv_t.translation() - Eigen::Vector3d(-1, -2, -3)).norm() == 0.0);
  CHECK(max_abs_diff(inverse(RigidMotion::from_rotation(rot_z(deg(90)))),
                     RigidMotion::from_rotation(rot_z(deg(-90)))) < 1e-15);
}

TEST_CASE("group axioms over random motions") {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 1000; ++k) {
    const RigidMotion a = random_motion(rng, 3.0, 5.0);
    const RigidMotion b = random_motion(rng, 3.0, 5.0);
    const RigidMotion c = random_motion(rng, 3.0, 5.0);
    CHECK(max_abs_diff(compose(compose(a, b), c), compose(a, compose(b, c))) < 1e-9);
    CHECK(max_abs_diff(compose(a, inverse(a)), RigidMotion::identity()) < 1e-9);
    CHECK(max_abs_diff(compose(inverse(a), a), RigidMotion::identity()) < 1e-9);
    CHECK(max_abs_diff(compose(a, RigidMotion::identity()), a) == 0.0);
  }
}

TEST_CASE("composition chains stay on SO(3)") {
  std::mt19937_64 rng(12);
  RigidMotion acc;
  for (int k = 0; k < 100000; ++k) acc = compose(random_motion(rng, 0.3, 0.1), acc);
  CHECK(orthonormality_error(acc.rotation()) <= 1e-12);
  CHECK(std::abs(acc.rotation().determinant() - 1.0) < 1e-9);
}

TEST_CASE("rigid motion rejects non-rotations") {
  Eigen::Matrix3d reflect = Eigen::Matrix3d::Identity();
  reflect(2, 2) = -1.0;
  CHECK_THROWS_AS(RigidMotion(reflect, Eigen::Vector3d::Zero()), Error);
  CHECK_THROWS_AS(RigidMotion(2.0 * Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero()), Error);
}

TEST_CASE("log map") {
  const Twist zero = log_map(RigidMotion::identity());
  CHECK(vec(zero).norm() == 0.0);

  const Twist pure_t = log_map(RigidMotion::from_translation({0.5, -2, 3}));
  CHECK(pure_t.omega.norm() == 0.0);
  CHECK((pure_t.nu - Eigen::Vector3d(0.5, -2, 3)).norm() < 1e-15);

  for (double theta : {1e-9, 1e-4, 0.04, 0.06, 1.0, 2.5, 3.1}) {
    const Twist tw = log_map(RigidMotion::from_rotation(rot_z(theta)));
    CHECK((tw.omega - Eigen::Vector3d(0, 0, theta)).norm() < 1e-12);
    CHECK(tw.nu.norm() < 1e-15);
  }
}

TEST_CASE("log map rejects the branch cut") {
  CHECK_THROWS_AS(log_map(RigidMotion::from_rotation(rot_z(std::numbers::pi))), Error);
  try {
    log_map(RigidMotion::from_rotation(rot_z(std::numbers::pi - 1e-7)));
    FAIL("expected AngleAtBranchCut");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AngleAtBranchCut);
  }
  // Just outside the margin the principal log is still returned.
  std::mt19937_64 rng(13);
  const Eigen::Vector3d axis = random_unit(rng);
  const RigidMotion m(axis_angle(axis, std::numbers::pi - 1e-4), {1, 2, 3});
  const Twist tw = log_map(m);
  CHECK((tw.omega - (std::numbers::pi - 1e-4) * axis).norm() < 1e-9);
  CHECK(max_abs_diff(exp_map(tw), m) < 1e-9);
}

TEST_CASE("exp map") {
  CHECK(max_abs_diff(exp_map(Twist::zero()), RigidMotion::identity()) == 0.0);
  const RigidMotion t = exp_map({Eigen::Vector3d::Zero(), Eigen::Vector3d(1, 2, 3)});
  CHECK(max_abs_diff(t, RigidMotion::from_translation({1, 2, 3})) == 0.0);
}

TEST_CASE("exp(log(m)) reproduces motions sampled from axis-angle") {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> s(-2.0, 2.0);
  for (int k = 0; k < 200; ++k) {
    const RigidMotion m(axis_angle(random_unit(rng), 0.5), {s(rng), s(rng), s(rng)});
    CHECK(max_abs_diff(exp_map(log_map(m)), m) < 1e-9);
  }
}

TEST_CASE("log(exp(tw)) round trip for |omega| <= 3") {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> r(0.0, 3.0);
  std::uniform_real_distribution<double> s(-4.0, 4.0);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    Twist tw{r(rng) * random_unit(rng), {s(rng), s(rng), s(rng)}};
    const RigidMotion m = exp_map(tw);
    CHECK(orthonormality_error(m.rotation()) < 1e-9);
    CHECK(std::abs(m.rotation().determinant() - 1.0) < 1e-9);
    worst = std::max(worst, (vec(log_map(m)) - vec(tw)).norm());
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("small-angle twists use accurate series") {
  for (double theta : {1e-12, 1e-7, 1e-3, 0.049, 0.051}) {
    const Twist tw{Eigen::Vector3d(theta, -theta, 0.5 * theta), Eigen::Vector3d(0.3, 0.2, -1)};
    CHECK((vec(log_map(exp_map(tw))) - vec(tw)).norm() < 1e-13);
  }
}

TEST_CASE("vec and cev") {
  CHECK(vec(Twist::zero()) == Vector6::Zero());
  const double theta = 0.7;
  Vector6 expected;
  expected << 0, 0, theta, 1, 0, 0;
  CHECK(vec({Eigen::Vector3d(0, 0, theta), Eigen::Vector3d(1, 0, 0)}) == expected);

  std::mt19937_64 rng(16);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int k = 0; k < 1000; ++k) {
    const Twist tw{{u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)}};
    CHECK(cev(vec(tw)) == tw);
  }
}

TEST_CASE("transform files round trip exactly") {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 50; ++k) {
    const RigidMotion m = random_motion(rng, 3.0, 100.0);
    const RigidMotion back = parse_transform(format_transform(m));
    CHECK(back.matrix() == m.matrix());
  }
  CHECK(format_transform(RigidMotion::identity()) == "1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n");
  CHECK_THROWS_AS(parse_transform("1 0 0 0\n0 1 0 0\n0 0 1 0\n"), Error);
  CHECK_THROWS_AS(parse_transform("1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 1 1\n"), Error);
  CHECK_THROWS_AS(parse_transform("2 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n"), Error);
}

#include "mvreg/synthetic.hpp"

#include <Eigen/Geometry>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "mvreg/error.hpp"
#include "mvreg/kdtree.hpp"

namespace mvreg::synthetic {

std::vector<Eigen::Vector3d> fibonacci_directions(std::size_t count, const Eigen::Matrix3d& spin) {
  std::vector<Eigen::Vector3d> dirs;
  dirs.reserve(count);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t k = 0; k < count; ++k) {
    const double z = 1.0 - (2.0 * static_cast<double>(k) + 1.0) / static_cast<double>(count);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * static_cast<double>(k);
    dirs.push_back(spin * Eigen::Vector3d(r * std::cos(phi), r * std::sin(phi), z));
  }
  return dirs;
}

Point3 blob_point(const Eigen::Vector3d& d) {
  // Lumps at fixed, irregularly placed centres break every symmetry of the
  // underlying ellipsoid.
  static const std::array<Eigen::Vector3d, 6> centres = {
      Eigen::Vector3d(0.8, 0.5, 0.33).normalized(),  Eigen::Vector3d(-0.6, 0.7, -0.4).normalized(),
      Eigen::Vector3d(0.1, -0.9, 0.45).normalized(), Eigen::Vector3d(-0.7, -0.3, 0.65).normalized(),
      Eigen::Vector3d(0.3, 0.2, -0.95).normalized(), Eigen::Vector3d(-0.95, 0.1, 0.1).normalized()};
  static const std::array<double, 6> heights = {0.35, 0.25, 0.3, 0.2, 0.28, 0.22};
  double radius = 1.0 + 0.1 * std::sin(3.0 * d.z() + 0.4);
  for (std::size_t k = 0; k < centres.size(); ++k) {
    radius += heights[k] * std::exp(-(1.0 - d.dot(centres[k])) / 0.06);
  }
  // knobs and dimples pin down the sliding directions the big lumps leave loose
  static const std::vector<Eigen::Vector3d> knobs =
      fibonacci_directions(14, Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, 3).normalized()).toRotationMatrix());
  for (std::size_t k = 0; k < knobs.size(); ++k) {
    const double h = (k % 2 == 0 ? 0.4 : -0.28) * (1.0 + 0.05 * static_cast<double>(k));
    radius += h * std::exp(-(1.0 - d.dot(knobs[k])) / 0.08);
  }
  return radius * Eigen::Vector3d(1.2 * d.x(), 0.9 * d.y(), 0.7 * d.z());
}

std::vector<Point3> sample_blob(std::size_t count, double scale, const Eigen::Matrix3d& spin,
                                const Eigen::Vector3d& grid_offset) {
  if (count == 0 || !(scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "sample_blob needs count > 0, scale > 0");
  constexpr double kUnitArea = 30.5;  // calibrated so the output count is close to `count`
  const double voxel = scale * std::sqrt(kUnitArea / static_cast<double>(count)) * 0.885;
  struct Best {
    double d2;
    Point3 p;
  };
  std::map<std::array<long, 3>, Best> cells;
  for (const Eigen::Vector3d& d : fibonacci_directions(40 * count, spin)) {
    const Point3 p = scale * blob_point(d);
    const Eigen::Vector3d g = p / voxel - grid_offset;
    const std::array<long, 3> key = {std::lround(g.x()), std::lround(g.y()), std::lround(g.z())};
    const Eigen::Vector3d centre(static_cast<double>(key[0]), static_cast<double>(key[1]),
                                 static_cast<double>(key[2]));
    const double d2 = (g - centre).squaredNorm();
    auto [it, inserted] = cells.try_emplace(key, Best{d2, p});
    if (!inserted && d2 < it->second.d2) it->second = Best{d2, p};
  }
  std::vector<Point3> out;
  out.reserve(cells.size());
  for (const auto& [key, best] : cells) out.push_back(best.p);
  return out;
}

Scene make_scene(const SceneSpec& spec) {
  if (spec.views < 2 || spec.object_points < 10 || !(spec.scale > 0.0) || spec.noise_fraction < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "scene needs >= 2 views, >= 10 points, positive scale");
  }
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto random_rotation = [&] {
    const Eigen::Quaterniond q(unit(rng), unit(rng), unit(rng), unit(rng));
    return q.normalized().toRotationMatrix();
  };

  const std::vector<Point3> shared = sample_blob(spec.object_points, spec.scale, random_rotation());

  Scene scene;
  std::vector<std::vector<Point3>> world_views(spec.views);
  for (std::size_t k = 0; k < spec.views; ++k) {
    // View axes sweep around the object at a slight elevation.
    const double azimuth = spec.view_spacing * static_cast<double>(k);
    const Eigen::Vector3d axis(std::cos(azimuth) * std::cos(0.3), std::sin(azimuth) * std::cos(0.3),
                               std::sin(0.3));
    const std::vector<Point3> own =
        spec.shared_samples
            ? std::vector<Point3>{}
            : sample_blob(spec.object_points, spec.scale, random_rotation(),
                          Eigen::Vector3d(unit(rng), unit(rng), unit(rng)) * 0.5);
    for (const Point3& p : spec.shared_samples ? shared : own) {
      if (p.normalized().dot(axis) > spec.visibility) world_views[k].push_back(p);
    }
  }

  scene.resolution = PointCloud(world_views.front()).resolution();
  scene.noise_sigma = spec.noise_fraction * scene.resolution;
  std::normal_distribution<double> noise(0.0, scene.noise_sigma > 0.0 ? scene.noise_sigma : 1.0);

  for (std::size_t k = 0; k < spec.views; ++k) {
    RigidMotion truth;
    if (k > 0) {
      const Eigen::Vector3d shift(unit(rng), unit(rng), unit(rng));
      truth = RigidMotion(random_rotation(), spec.scale * shift);
    }
    const RigidMotion to_local = inverse(truth);
    std::vector<Point3> local;
    local.reserve(world_views[k].size());
    for (const Point3& p : world_views[k]) {
      Point3 q = to_local.apply(p);
      if (scene.noise_sigma > 0.0) q += Eigen::Vector3d(noise(rng), noise(rng), noise(rng));
      local.push_back(q);
    }
    scene.clouds.emplace_back(std::move(local));
    scene.truth.push_back(truth);
  }
  return scene;
}

Pair make_pair(const PairSpec& spec) {
  if (spec.points < 10 || !(spec.max_rotation >= 0.0) || !(spec.max_translation >= 0.0) ||
      !(spec.max_noise_fraction >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "pair needs >= 10 points and nonnegative ranges");
  }
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto direction = [&] {
    Eigen::Vector3d v;
    do v = Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
    while (v.norm() < 1e-6);
    return Eigen::Vector3d(v.normalized());
  };

  const Eigen::Matrix3d spin = Eigen::AngleAxisd(3.0 * uniform(rng), direction()).toRotationMatrix();
  const Eigen::Vector3d offset(uniform(rng), uniform(rng), uniform(rng));
  const Eigen::Vector3d target_axis = direction();
  const Eigen::Vector3d source_axis = (target_axis + 0.8 * direction()).normalized();

  // Crops keep the points facing each axis; the master sample is resized
  // until the larger crop lands in [0.9, 1] of the requested size.
  std::vector<Point3> source, target;
  std::size_t master = spec.points;
  for (int pass = 0; pass < 8; ++pass) {
    source.clear();
    target.clear();
    for (const Point3& p : sample_blob(master, 1.0, spin, offset)) {
      const Eigen::Vector3d d = p.normalized();
      if (d.dot(target_axis) > -0.3) target.push_back(p);
      if (d.dot(source_axis) > -0.3) source.push_back(p);
    }
    const std::size_t larger = std::max(source.size(), target.size());
    if (larger <= spec.points && 10 * larger >= 9 * spec.points) break;
    master = static_cast<std::size_t>(static_cast<double>(master) * 0.97 * static_cast<double>(spec.points) /
                                      static_cast<double>(larger));
  }

  Pair pair;
  pair.resolution = PointCloud(target).resolution();
  pair.noise_sigma = uniform(rng) * spec.max_noise_fraction * pair.resolution;
  for (Point3& p : source) p += pair.noise_sigma * Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
  for (Point3& p : target) p += pair.noise_sigma * Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));

  const double angle = uniform(rng) * spec.max_rotation;
  const Eigen::Vector3d axis = direction();
  pair.truth = RigidMotion(Eigen::AngleAxisd(angle, axis).toRotationMatrix(), spec.max_translation * direction());

  std::size_t close = 0;
  const KdTree tree(target);
  for (const Point3& p : source) {
    if (tree.nearest(p).squared_distance <= 4.0 * pair.resolution * pair.resolution) ++close;
  }
  pair.overlap = static_cast<double>(close) / static_cast<double>(source.size());
  pair.source = PointCloud(transform_points(source, inverse(pair.truth)));
  pair.target = PointCloud(std::move(target));
  return pair;
}

}  // namespace mvreg::synthetic

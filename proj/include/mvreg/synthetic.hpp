#pragma once

// Deterministic synthetic data: scan sets with known ground truth for the
// registration benchmark, and analytic meshes for the saliency tools.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mvreg/geometry.hpp"
#include "mvreg/mesh.hpp"
#include "mvreg/point_cloud.hpp"
#include "mvreg/saliency.hpp"

namespace mvreg::synthetic {

/// Roughly uniform unit directions (Fibonacci lattice), rotated by `spin`.
std::vector<Eigen::Vector3d> fibonacci_directions(std::size_t count, const Eigen::Matrix3d& spin);

/// Smooth, asymmetric closed surface (a lumpy ellipsoid of unit scale)
/// evaluated along a unit direction.
Point3 blob_point(const Eigen::Vector3d& direction);

/// Samples the blob (scaled by `scale`) with roughly uniform area density:
/// a dense direction lattice rotated by `spin` is thinned on a voxel grid
/// shifted by `grid_offset` (fractions of a voxel), keeping the sample
/// closest to each voxel centre. Produces about `count` points.
std::vector<Point3> sample_blob(std::size_t count, double scale, const Eigen::Matrix3d& spin,
                                const Eigen::Vector3d& grid_offset = Eigen::Vector3d::Zero());

struct SceneSpec {
  std::size_t views = 4;
  /// Points sampled on the whole object; each view keeps the visible part.
  std::size_t object_points = 3000;
  /// Object size in model units (desk scale: half a metre).
  double scale = 0.5;
  /// A point is visible from a view when dot(direction, view axis) exceeds this.
  double visibility = -0.25;
  /// Angle between consecutive view axes, radians.
  double view_spacing = 1.0;
  /// Per-view Gaussian noise as a fraction of the sampling resolution.
  double noise_fraction = 0.2;
  /// Whether every view is cut from one shared sample (true) or from its own
  /// independent sample, as real scans are.
  bool shared_samples = false;
  std::uint64_t seed = 1;
};

struct Scene {
  /// Clouds in their local (view) frames.
  std::vector<PointCloud> clouds;
  /// Ground-truth global motions, view frame to reference frame; truth[0] = I.
  std::vector<RigidMotion> truth;
  /// Mean nearest-neighbour spacing of the first view.
  double resolution = 0.0;
  /// Standard deviation of the added noise, model units.
  double noise_sigma = 0.0;
};

Scene make_scene(const SceneSpec& spec);

struct PairSpec {
  /// Size of the larger crop, reached within 10% from below.
  std::size_t points = 1000;
  double max_rotation = 0.5235987755982988;  // 30 degrees
  double max_translation = 0.1;
  /// Noise standard deviation as a fraction of the target resolution, drawn
  /// uniformly from [0, max_noise_fraction].
  double max_noise_fraction = 0.5;
  std::uint64_t seed = 1;
};

/// Two overlapping crops of one blob sample with independent noise. The
/// source is expressed in a frame where `truth` maps it onto the target.
struct Pair {
  PointCloud source;
  PointCloud target;
  RigidMotion truth;
  double resolution = 0.0;  // of the target
  double noise_sigma = 0.0;
  /// Fraction of aligned source points within 2 resolutions of the target.
  double overlap = 0.0;
};

Pair make_pair(const PairSpec& spec);

/// Subdivided icosahedron projected onto a sphere; outward winding.
TriangleMesh icosphere(int subdivisions, double radius);

/// Square grid over [-half, half]^2 with z = height(x, y), cells x cells quads
/// split into triangles; winding gives +z normals.
TriangleMesh height_grid(std::size_t cells, double half, const std::function<double(double, double)>& height);

/// Open tube of the given radius along z, `around` segments by `along` rings.
TriangleMesh cylinder(double radius, double length, std::size_t around, std::size_t along);

struct Bump {
  double x = 0.0, y = 0.0;
  double height = 0.0;
  double width = 0.1;
};

/// Smooth dome over [-1, 1]^2 with Gaussian bumps added.
double dome_height(double x, double y, std::span<const Bump> bumps);

/// Eye/eye/nose triangle of the face models (outward +z normal).
FacialTriangle standard_face_triangle();

struct BatteryModel {
  TriangleMesh mesh;
  bool face = false;
  /// Short description of the planted features.
  std::string kind;
};

/// Seeded retrieval battery: `per_class` faces (three bumps at jittered
/// eye/nose positions) and `per_class` non-faces (no bump, two bumps, or a row
/// of bumps), each moved by a random rotation, translation and scale.
std::vector<BatteryModel> face_battery(std::uint64_t seed, std::size_t per_class = 18, std::size_t cells = 160);

}  // namespace mvreg::synthetic

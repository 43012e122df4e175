#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mvreg/geometry.hpp"

namespace mvreg {

using Face = std::array<std::uint32_t, 3>;

/// Indexed triangle mesh. Construction checks face indices and rejects faces
/// that repeat a vertex.
class TriangleMesh {
 public:
  TriangleMesh() = default;
  TriangleMesh(std::vector<Point3> vertices, std::vector<Face> faces);

  const std::vector<Point3>& vertices() const { return vertices_; }
  const std::vector<Face>& faces() const { return faces_; }
  std::size_t vertex_count() const { return vertices_.size(); }

  /// Length of the axis-aligned bounding-box diagonal.
  double bbox_diagonal() const;
  /// Area-weighted vertex normals (unit length; zero for isolated vertices).
  std::vector<Eigen::Vector3d> vertex_normals() const;
  /// Sorted 1-ring vertex neighbours.
  std::vector<std::vector<std::uint32_t>> adjacency() const;
  /// Vertices on an edge used by exactly one face.
  std::vector<bool> boundary_vertices() const;
  /// Throws UnreferencedVertex when some vertex belongs to no face.
  void require_all_referenced() const;

 private:
  std::vector<Point3> vertices_;
  std::vector<Face> faces_;
};

/// Discrete mean curvature from the cotangent Laplacian with mixed Voronoi
/// areas. H = |Δv|/2, positive where the surface bends away from the vertex
/// normal (a sphere with outward normals has H = 1/r). Boundary vertices take
/// the value of the closest interior vertex.
std::vector<double> mean_curvature(const TriangleMesh& mesh);

}  // namespace mvreg

#include "mvreg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <map>
#include <utility>

#include "mvreg/error.hpp"
#include "mvreg/kdtree.hpp"

namespace mvreg {

namespace {

double cot(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const double s = a.cross(b).norm();
  return s > 0.0 ? a.dot(b) / s : 0.0;
}

}  // namespace

TriangleMesh::TriangleMesh(std::vector<Point3> vertices, std::vector<Face> faces)
    : vertices_(std::move(vertices)), faces_(std::move(faces)) {
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    const Face& t = faces_[f];
    for (std::uint32_t v : t) {
      if (v >= vertices_.size()) {
        throw Error(ErrorCode::InvalidArgument,
                    fmt::format("face {} references vertex {} of {}", f, v, vertices_.size()));
      }
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
      throw Error(ErrorCode::InvalidArgument, fmt::format("face {} repeats a vertex", f));
    }
  }
  for (const Point3& p : vertices_) {
    if (!p.allFinite()) throw Error(ErrorCode::InvalidArgument, "mesh vertex is not finite");
  }
}

double TriangleMesh::bbox_diagonal() const {
  if (vertices_.empty()) return 0.0;
  Eigen::Vector3d lo = vertices_.front(), hi = vertices_.front();
  for (const Point3& p : vertices_) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

std::vector<Eigen::Vector3d> TriangleMesh::vertex_normals() const {
  std::vector<Eigen::Vector3d> n(vertices_.size(), Eigen::Vector3d::Zero());
  for (const Face& t : faces_) {
    const Eigen::Vector3d w = (vertices_[t[1]] - vertices_[t[0]]).cross(vertices_[t[2]] - vertices_[t[0]]);
    for (std::uint32_t v : t) n[v] += w;
  }
  for (auto& v : n) {
    const double len = v.norm();
    if (len > 0.0) v /= len;
  }
  return n;
}

std::vector<std::vector<std::uint32_t>> TriangleMesh::adjacency() const {
  std::vector<std::vector<std::uint32_t>> adj(vertices_.size());
  for (const Face& t : faces_) {
    for (int k = 0; k < 3; ++k) {
      adj[t[k]].push_back(t[(k + 1) % 3]);
      adj[t[k]].push_back(t[(k + 2) % 3]);
    }
  }
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  return adj;
}

std::vector<bool> TriangleMesh::boundary_vertices() const {
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> uses;
  for (const Face& t : faces_) {
    for (int k = 0; k < 3; ++k) {
      const auto a = t[k], b = t[(k + 1) % 3];
      ++uses[{std::min(a, b), std::max(a, b)}];
    }
  }
  std::vector<bool> out(vertices_.size(), false);
  for (const auto& [edge, count] : uses) {
    if (count == 1) out[edge.first] = out[edge.second] = true;
  }
  return out;
}

void TriangleMesh::require_all_referenced() const {
  std::vector<bool> used(vertices_.size(), false);
  for (const Face& t : faces_) {
    for (std::uint32_t v : t) used[v] = true;
  }
  const auto it = std::find(used.begin(), used.end(), false);
  if (it != used.end()) {
    throw Error(ErrorCode::UnreferencedVertex,
                fmt::format("vertex {} belongs to no face", std::distance(used.begin(), it)));
  }
}

std::vector<double> mean_curvature(const TriangleMesh& mesh) {
  mesh.require_all_referenced();
  const auto& v = mesh.vertices();
  const std::size_t n = v.size();
  std::vector<Eigen::Vector3d> laplace(n, Eigen::Vector3d::Zero());
  std::vector<double> area(n, 0.0);

  for (const Face& t : mesh.faces()) {
    const Point3& a = v[t[0]];
    const Point3& b = v[t[1]];
    const Point3& c = v[t[2]];
    const std::array<Eigen::Vector3d, 3> p = {a, b, c};
    const double tri_area = 0.5 * (b - a).cross(c - a).norm();
    if (!(tri_area > 0.0)) continue;
    for (int k = 0; k < 3; ++k) {
      const int i = k, j = (k + 1) % 3, o = (k + 2) % 3;
      // Edge (i, j) is weighted by the cotangent of the angle opposite it.
      const double w = cot(p[i] - p[o], p[j] - p[o]);
      laplace[t[i]] += w * (p[j] - p[i]);
      laplace[t[j]] += w * (p[i] - p[j]);
    }
    // Mixed area: Voronoi share for non-obtuse triangles, else a fixed split.
    const std::array<double, 3> dots = {(b - a).dot(c - a), (a - b).dot(c - b), (a - c).dot(b - c)};
    const int obtuse = dots[0] < 0.0 ? 0 : dots[1] < 0.0 ? 1 : dots[2] < 0.0 ? 2 : -1;
    for (int k = 0; k < 3; ++k) {
      if (obtuse < 0) {
        const int j = (k + 1) % 3, o = (k + 2) % 3;
        area[t[k]] += ((p[j] - p[k]).squaredNorm() * cot(p[k] - p[o], p[j] - p[o]) +
                       (p[o] - p[k]).squaredNorm() * cot(p[k] - p[j], p[o] - p[j])) /
                      8.0;
      } else {
        area[t[k]] += tri_area * (k == obtuse ? 0.5 : 0.25);
      }
    }
  }

  const std::vector<Eigen::Vector3d> normals = mesh.vertex_normals();
  const std::vector<bool> boundary = mesh.boundary_vertices();
  std::vector<double> h(n, 0.0);
  std::vector<Point3> interior_points;
  std::vector<std::size_t> interior_ids;
  for (std::size_t i = 0; i < n; ++i) {
    if (boundary[i]) continue;
    const Eigen::Vector3d k = laplace[i] / (2.0 * area[i]);
    // k = -2 H n, so H is positive when k points against the normal.
    h[i] = (k.dot(normals[i]) <= 0.0 ? 0.5 : -0.5) * k.norm();
    interior_points.push_back(v[i]);
    interior_ids.push_back(i);
  }
  if (!interior_ids.empty()) {
    const KdTree tree(interior_points);
    for (std::size_t i = 0; i < n; ++i) {
      if (boundary[i]) h[i] = h[interior_ids[tree.nearest(v[i]).index]];
    }
  }
  return h;
}

}  // namespace mvreg

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mvreg/mesh.hpp"

namespace mvreg {

struct RetrievalConfig {
  /// ξ as a fraction of the bounding-box diagonal; scales are 2ξ..6ξ.
  double scale_fraction = 0.003;
  /// th_saliency defaults to this quantile of the saliency values ...
  double saliency_percentile = 0.7;
  /// ... but never below this fraction of the largest |curvature|, so that a
  /// field with no real structure selects nothing.
  double saliency_floor = 1e-3;
  /// Absolute th_saliency; replaces the two rules above when set.
  std::optional<double> saliency_threshold;
  /// th_dist = dist_factor * ξ unless dist_threshold is set.
  double dist_factor = 5.0;
  std::optional<double> dist_threshold;
  /// Thres_FT, in the standard triangle's units.
  double thres_ft = 0.08;

  void validate() const;
};

struct SaliencyField {
  std::vector<double> values;
  double xi = 0.0;
  std::array<double, 5> scales{};
  /// Largest |curvature| of the input field.
  double max_abs_curvature = 0.0;
};

/// Gaussian-weighted mean of `curvature` over the vertices strictly closer
/// than sigma to vertex v (v included).
double weighted_curvature(const TriangleMesh& mesh, std::span<const double> curvature, std::size_t v, double sigma);

/// Multi-scale centre-surround saliency. Per scale, φ = |G(σ) - G(2σ)|; each
/// map is weighted by (1 - m)² where m is the mean of its other 1-ring local
/// maxima after scaling the map to [0, 1], and the weighted maps are summed.
SaliencyField saliency(const TriangleMesh& mesh, std::span<const double> curvature, const RetrievalConfig& cfg);
SaliencyField saliency(const TriangleMesh& mesh, const RetrievalConfig& cfg);

double saliency_threshold(const SaliencyField& field, const RetrievalConfig& cfg);
double linkage_distance(const SaliencyField& field, const RetrievalConfig& cfg);

struct SalientCluster {
  std::vector<std::uint32_t> members;  // ascending
  Point3 centroid = Point3::Zero();
  double peak_saliency = 0.0;
};

/// Single-linkage clusters (distance < th_dist) of the vertices with
/// saliency >= th_saliency; clusters under 3 vertices are dropped. Ordered by
/// smallest member.
std::vector<SalientCluster> cluster_salient(const SaliencyField& field, const TriangleMesh& mesh,
                                            const RetrievalConfig& cfg);

class FacialTriangle {
 public:
  /// Throws DegenerateTriangle for (near) collinear vertices.
  FacialTriangle(const Point3& a, const Point3& b, const Point3& c);

  const std::array<Point3, 3>& vertices() const { return v_; }
  Point3 centroid() const { return (v_[0] + v_[1] + v_[2]) / 3.0; }
  /// Unit normal of the winding a -> b -> c.
  const Eigen::Vector3d& normal() const { return n_; }

 private:
  std::array<Point3, 3> v_;
  Eigen::Vector3d n_;
};

/// Similarity-aligns `test` onto `standard` (centroids, normals, best
/// in-plane angle and scale in the least-squares sense) and returns the mean
/// vertex distance, minimized over the three cyclic correspondences.
double match_triangle(const FacialTriangle& test, const FacialTriangle& standard);

/// Reads "eye_l x y z", "eye_r x y z", "nose x y z" lines (any order; blank
/// lines and '#' comments ignored) into the triangle eye_l -> eye_r -> nose.
FacialTriangle parse_standard_triangle(const std::string& text);
FacialTriangle read_standard_triangle(const std::string& path);

struct RetrievalResult {
  std::size_t model = 0;
  std::size_t clusters = 0;
  std::size_t candidates = 0;
  /// Collinear candidate triangles that were skipped.
  std::size_t degenerate = 0;
  /// +inf when there is no candidate.
  double best_error = 0.0;
  bool is_face = false;
};

/// Per model: saliency, clusters, all C(N, 3) centroid triangles matched
/// against the standard. Candidate windings are chosen so their normal agrees
/// with the mean surface normal over the clusters' vertices.
RetrievalResult retrieve_face(const TriangleMesh& model, const FacialTriangle& standard, const RetrievalConfig& cfg,
                              std::size_t id = 0);
std::vector<RetrievalResult> retrieve_faces(std::span<const TriangleMesh> models, const FacialTriangle& standard,
                                            const RetrievalConfig& cfg, unsigned threads = 1);

/// One line per model: id, clusters, best E_FT (or "none"), face|non-face.
std::string format_retrieval(std::span<const RetrievalResult> results);

}  // namespace mvreg

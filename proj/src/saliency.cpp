#include "mvreg/saliency.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "mvreg/error.hpp"
#include "mvreg/kdtree.hpp"
#include "parallel.hpp"

namespace mvreg {

namespace {

double max_abs(std::span<const double> values) {
  double m = 0.0;
  for (double x : values) m = std::max(m, std::abs(x));
  return m;
}

// Scale weight (1 - m)^2, m = mean of the 1-ring local maxima of the map
// scaled to [0, 1], leaving out the global maximum itself.
double map_weight(const std::vector<double>& map, const std::vector<std::vector<std::uint32_t>>& adj) {
  const auto top = std::max_element(map.begin(), map.end());
  if (top == map.end() || !(*top > 0.0)) return 0.0;
  const std::size_t argmax = static_cast<std::size_t>(top - map.begin());
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t v = 0; v < map.size(); ++v) {
    if (v == argmax || !(map[v] > 0.0)) continue;
    const bool peak = std::all_of(adj[v].begin(), adj[v].end(), [&](std::uint32_t u) { return map[v] >= map[u]; });
    if (peak) {
      sum += map[v] / *top;
      ++count;
    }
  }
  const double mean = count ? sum / static_cast<double>(count) : 0.0;
  return (1.0 - mean) * (1.0 - mean);
}

Eigen::Matrix3d rotate_onto(const Eigen::Vector3d& from, const Eigen::Vector3d& to) {
  const Eigen::Vector3d axis = from.cross(to);
  const double s = axis.norm();
  const double c = from.dot(to);
  if (s < 1e-15) {
    if (c > 0.0) return Eigen::Matrix3d::Identity();
    // Half turn about any axis perpendicular to `from`.
    Eigen::Vector3d perp = from.unitOrthogonal();
    return Eigen::AngleAxisd(std::acos(-1.0), perp).toRotationMatrix();
  }
  return Eigen::AngleAxisd(std::atan2(s, c), axis / s).toRotationMatrix();
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

void RetrievalConfig::validate() const {
  if (!(scale_fraction > 0.0)) throw Error(ErrorCode::InvalidArgument, "scale fraction must be positive");
  if (!(saliency_percentile >= 0.0 && saliency_percentile <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "saliency percentile must lie in [0, 1]");
  }
  if (!(saliency_floor >= 0.0)) throw Error(ErrorCode::InvalidArgument, "saliency floor must be >= 0");
  if (!(dist_factor > 0.0)) throw Error(ErrorCode::InvalidArgument, "distance factor must be positive");
  if (dist_threshold && !(*dist_threshold > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "distance threshold must be positive");
  }
  if (saliency_threshold && !std::isfinite(*saliency_threshold)) {
    throw Error(ErrorCode::InvalidArgument, "saliency threshold must be finite");
  }
  if (!(thres_ft > 0.0)) throw Error(ErrorCode::InvalidArgument, "Thres_FT must be positive");
}

double weighted_curvature(const TriangleMesh& mesh, std::span<const double> curvature, std::size_t v, double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be positive");
  if (curvature.size() != mesh.vertex_count() || v >= mesh.vertex_count()) {
    throw Error(ErrorCode::ShapeMismatch, "curvature length or vertex index does not match the mesh");
  }
  const auto& pts = mesh.vertices();
  double num = 0.0, den = 0.0;
  for (std::size_t x = 0; x < pts.size(); ++x) {
    const double d2 = (pts[x] - pts[v]).squaredNorm();
    if (d2 < sigma * sigma) {
      const double w = std::exp(-d2 / (2.0 * sigma * sigma));
      num += w * curvature[x];
      den += w;
    }
  }
  return num / den;
}

SaliencyField saliency(const TriangleMesh& mesh, std::span<const double> curvature, const RetrievalConfig& cfg) {
  cfg.validate();
  if (curvature.size() != mesh.vertex_count()) {
    throw Error(ErrorCode::ShapeMismatch,
                fmt::format("{} curvature values for {} vertices", curvature.size(), mesh.vertex_count()));
  }
  const double diagonal = mesh.bbox_diagonal();
  if (!(diagonal > 0.0)) throw Error(ErrorCode::DegenerateBoundingBox, "mesh bounding box has zero diagonal");

  SaliencyField field;
  field.xi = cfg.scale_fraction * diagonal;
  for (int i = 0; i < 5; ++i) field.scales[static_cast<std::size_t>(i)] = (i + 2) * field.xi;
  field.max_abs_curvature = max_abs(curvature);

  const auto& pts = mesh.vertices();
  const std::size_t n = pts.size();
  const KdTree tree(pts);
  const double reach = 2.0 * field.scales.back();
  // g[s][v]: smoothed curvature at the 10 radii σ_i and 2σ_i.
  std::array<double, 10> radii{};
  for (std::size_t i = 0; i < 5; ++i) {
    radii[i] = field.scales[i];
    radii[i + 5] = 2.0 * field.scales[i];
  }
  std::vector<std::array<double, 10>> g(n);
  for (std::size_t v = 0; v < n; ++v) {
    std::array<double, 10> num{}, den{};
    for (const auto& nb : tree.within(pts[v], reach)) {
      for (std::size_t r = 0; r < 10; ++r) {
        if (nb.squared_distance < radii[r] * radii[r]) {
          const double w = std::exp(-nb.squared_distance / (2.0 * radii[r] * radii[r]));
          num[r] += w * curvature[nb.index];
          den[r] += w;
        }
      }
    }
    for (std::size_t r = 0; r < 10; ++r) g[v][r] = num[r] / den[r];
  }

  const auto adj = mesh.adjacency();
  field.values.assign(n, 0.0);
  std::vector<double> map(n);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t v = 0; v < n; ++v) map[v] = std::abs(g[v][i] - g[v][i + 5]);
    const double w = map_weight(map, adj);
    for (std::size_t v = 0; v < n; ++v) field.values[v] += w * map[v];
  }
  return field;
}

SaliencyField saliency(const TriangleMesh& mesh, const RetrievalConfig& cfg) {
  const std::vector<double> h = mean_curvature(mesh);
  return saliency(mesh, h, cfg);
}

double saliency_threshold(const SaliencyField& field, const RetrievalConfig& cfg) {
  if (cfg.saliency_threshold) return *cfg.saliency_threshold;
  const double floor = cfg.saliency_floor * field.max_abs_curvature;
  if (field.values.empty()) return floor;
  std::vector<double> sorted = field.values;
  std::sort(sorted.begin(), sorted.end());
  // Nearest-rank quantile.
  const auto rank = static_cast<std::size_t>(std::ceil(cfg.saliency_percentile * static_cast<double>(sorted.size())));
  const double q = sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
  return std::max(q, floor);
}

double linkage_distance(const SaliencyField& field, const RetrievalConfig& cfg) {
  return cfg.dist_threshold ? *cfg.dist_threshold : cfg.dist_factor * field.xi;
}

std::vector<SalientCluster> cluster_salient(const SaliencyField& field, const TriangleMesh& mesh,
                                            const RetrievalConfig& cfg) {
  cfg.validate();
  if (field.values.size() != mesh.vertex_count()) {
    throw Error(ErrorCode::ShapeMismatch, "saliency field does not match the mesh");
  }
  const double threshold = saliency_threshold(field, cfg);
  const double link = linkage_distance(field, cfg);

  std::vector<std::uint32_t> selected;
  std::vector<Point3> pos;
  for (std::size_t v = 0; v < field.values.size(); ++v) {
    if (field.values[v] >= threshold && field.values[v] > 0.0) {
      selected.push_back(static_cast<std::uint32_t>(v));
      pos.push_back(mesh.vertices()[v]);
    }
  }
  std::vector<std::size_t> parent(selected.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  const KdTree tree(pos);
  for (std::size_t a = 0; a < pos.size(); ++a) {
    for (const auto& nb : tree.within(pos[a], link)) {
      const std::size_t ra = find_root(parent, a), rb = find_root(parent, nb.index);
      if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
    }
  }

  // Roots are the smallest member of each set, so scanning in order yields
  // clusters sorted by their first vertex.
  std::vector<std::size_t> slot(selected.size(), 0);
  std::vector<SalientCluster> clusters;
  std::vector<std::size_t> root_to_cluster(selected.size(), std::numeric_limits<std::size_t>::max());
  for (std::size_t a = 0; a < selected.size(); ++a) {
    const std::size_t r = find_root(parent, a);
    if (root_to_cluster[r] == std::numeric_limits<std::size_t>::max()) {
      root_to_cluster[r] = clusters.size();
      clusters.emplace_back();
    }
    SalientCluster& c = clusters[root_to_cluster[r]];
    c.members.push_back(selected[a]);
    c.centroid += pos[a];
    c.peak_saliency = std::max(c.peak_saliency, field.values[selected[a]]);
  }
  std::vector<SalientCluster> kept;
  for (SalientCluster& c : clusters) {
    if (c.members.size() < 3) continue;
    c.centroid /= static_cast<double>(c.members.size());
    kept.push_back(std::move(c));
  }
  return kept;
}

FacialTriangle::FacialTriangle(const Point3& a, const Point3& b, const Point3& c) : v_{a, b, c} {
  for (const Point3& p : v_) {
    if (!p.allFinite()) throw Error(ErrorCode::InvalidArgument, "triangle vertex is not finite");
  }
  const Eigen::Vector3d cross = (b - a).cross(c - a);
  const double longest = std::max({(b - a).squaredNorm(), (c - b).squaredNorm(), (a - c).squaredNorm()});
  if (!(cross.norm() > 1e-10 * longest)) {
    throw Error(ErrorCode::DegenerateTriangle, "triangle vertices are collinear or coincident");
  }
  n_ = cross.normalized();
}

double match_triangle(const FacialTriangle& test, const FacialTriangle& standard) {
  const Eigen::Vector3d n = standard.normal();
  const Eigen::Matrix3d onto = rotate_onto(test.normal(), n);
  std::array<Eigen::Vector3d, 3> p, q;
  for (std::size_t k = 0; k < 3; ++k) {
    p[k] = onto * (test.vertices()[k] - test.centroid());
    q[k] = standard.vertices()[k] - standard.centroid();
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t shift = 0; shift < 3; ++shift) {
    double cross = 0.0, dot = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      const Eigen::Vector3d& a = p[(k + shift) % 3];
      cross += a.cross(q[k]).dot(n);
      dot += a.dot(q[k]);
    }
    const Eigen::Matrix3d spin = Eigen::AngleAxisd(std::atan2(cross, dot), n).toRotationMatrix();
    std::array<Eigen::Vector3d, 3> r;
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      r[k] = spin * p[(k + shift) % 3];
      num += r[k].dot(q[k]);
      den += r[k].squaredNorm();
    }
    const double s = num / den;
    double err = 0.0;
    for (std::size_t k = 0; k < 3; ++k) err += (s * r[k] - q[k]).norm();
    best = std::min(best, err / 3.0);
  }
  return best;
}

FacialTriangle parse_standard_triangle(const std::string& text) {
  std::array<std::optional<Point3>, 3> slots;
  const std::array<std::string, 3> labels = {"eye_l", "eye_r", "nose"};
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string label;
    if (!(fields >> label)) continue;
    const auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) {
      throw Error(ErrorCode::InvalidArgument, fmt::format("line {}: unknown label '{}'", number, label));
    }
    Point3 p;
    std::string extra;
    if (!(fields >> p.x() >> p.y() >> p.z()) || (fields >> extra)) {
      throw Error(ErrorCode::InvalidArgument, fmt::format("line {}: expected '{} x y z'", number, label));
    }
    auto& slot = slots[static_cast<std::size_t>(it - labels.begin())];
    if (slot) throw Error(ErrorCode::InvalidArgument, fmt::format("line {}: '{}' given twice", number, label));
    slot = p;
  }
  for (std::size_t k = 0; k < 3; ++k) {
    if (!slots[k]) throw Error(ErrorCode::InvalidArgument, fmt::format("standard triangle lacks '{}'", labels[k]));
  }
  return {*slots[0], *slots[1], *slots[2]};
}

FacialTriangle read_standard_triangle(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, fmt::format("cannot open '{}'", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_standard_triangle(buffer.str());
}

RetrievalResult retrieve_face(const TriangleMesh& model, const FacialTriangle& standard, const RetrievalConfig& cfg,
                              std::size_t id) {
  RetrievalResult result;
  result.model = id;
  result.best_error = std::numeric_limits<double>::infinity();
  const SaliencyField field = saliency(model, cfg);
  const std::vector<SalientCluster> clusters = cluster_salient(field, model, cfg);
  result.clusters = clusters.size();
  if (clusters.size() < 3) return result;

  const std::vector<Eigen::Vector3d> normals = model.vertex_normals();
  std::vector<Eigen::Vector3d> cluster_normal;
  for (const SalientCluster& c : clusters) {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    for (std::uint32_t v : c.members) sum += normals[v];
    cluster_normal.push_back(sum);
  }
  const std::size_t n = clusters.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t k = j + 1; k < n; ++k) {
        const Eigen::Vector3d up = cluster_normal[i] + cluster_normal[j] + cluster_normal[k];
        try {
          FacialTriangle t(clusters[i].centroid, clusters[j].centroid, clusters[k].centroid);
          if (t.normal().dot(up) < 0.0) t = FacialTriangle(clusters[i].centroid, clusters[k].centroid, clusters[j].centroid);
          ++result.candidates;
          result.best_error = std::min(result.best_error, match_triangle(t, standard));
        } catch (const Error& e) {
          if (e.code() != ErrorCode::DegenerateTriangle) throw;
          ++result.degenerate;
        }
      }
    }
  }
  result.is_face = result.best_error < cfg.thres_ft;
  return result;
}

std::vector<RetrievalResult> retrieve_faces(std::span<const TriangleMesh> models, const FacialTriangle& standard,
                                            const RetrievalConfig& cfg, unsigned threads) {
  cfg.validate();
  std::vector<RetrievalResult> out(models.size());
  detail::parallel_for(models.size(), threads,
                       [&](std::size_t m) { out[m] = retrieve_face(models[m], standard, cfg, m); });
  return out;
}

std::string format_retrieval(std::span<const RetrievalResult> results) {
  std::string out = "model,clusters,candidates,degenerate,best_error,verdict\n";
  for (const RetrievalResult& r : results) {
    out += fmt::format("{},{},{},{},{},{}\n", r.model, r.clusters, r.candidates, r.degenerate,
                       std::isfinite(r.best_error) ? fmt::format("{:.9e}", r.best_error) : std::string("none"),
                       r.is_face ? "face" : "non-face");
  }
  return out;
}

}  // namespace mvreg

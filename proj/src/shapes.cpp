#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "mvreg/error.hpp"
#include "mvreg/synthetic.hpp"

namespace mvreg::synthetic {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Face coordinates of the planted features, dome units. The subject's left
// eye sits at +x when the face looks along +z.
const Bump kEyeLeft{0.35, 0.25, 0.08, 0.07};
const Bump kEyeRight{-0.35, 0.25, 0.08, 0.07};
const Bump kNose{0.0, -0.2, 0.1, 0.08};

Point3 feature_point(const Bump& b) {
  const Bump only[] = {b};
  return {b.x, b.y, dome_height(b.x, b.y, only)};
}

TriangleMesh moved(const TriangleMesh& mesh, const Eigen::Matrix3d& r, const Eigen::Vector3d& t, double scale) {
  std::vector<Point3> v = mesh.vertices();
  for (Point3& p : v) p = scale * (r * p) + t;
  return {std::move(v), mesh.faces()};
}

}  // namespace

TriangleMesh icosphere(int subdivisions, double radius) {
  if (subdivisions < 0 || !(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "icosphere needs subdivisions >= 0 and radius > 0");
  const double g = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Point3> v = {{-1, g, 0}, {1, g, 0}, {-1, -g, 0}, {1, -g, 0}, {0, -1, g}, {0, 1, g},
                           {0, -1, -g}, {0, 1, -g}, {g, 0, -1}, {g, 0, 1}, {-g, 0, -1}, {-g, 0, 1}};
  std::vector<Face> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                         {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                         {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (Point3& p : v) p.normalize();
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> mid;
    auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
      const auto key = std::minmax(a, b);
      const auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const auto id = static_cast<std::uint32_t>(v.size() - 1);
      mid.emplace(key, id);
      return id;
    };
    std::vector<Face> next;
    next.reserve(4 * f.size());
    for (const Face& t : f) {
      const std::uint32_t ab = midpoint(t[0], t[1]), bc = midpoint(t[1], t[2]), ca = midpoint(t[2], t[0]);
      next.push_back({t[0], ab, ca});
      next.push_back({t[1], bc, ab});
      next.push_back({t[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    f = std::move(next);
  }
  for (Point3& p : v) p *= radius;
  return {std::move(v), std::move(f)};
}

TriangleMesh height_grid(std::size_t cells, double half, const std::function<double(double, double)>& height) {
  if (cells < 1 || !(half > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid needs cells >= 1 and half > 0");
  const std::size_t side = cells + 1;
  std::vector<Point3> v;
  v.reserve(side * side);
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      const double x = -half + 2.0 * half * static_cast<double>(c) / static_cast<double>(cells);
      const double y = -half + 2.0 * half * static_cast<double>(r) / static_cast<double>(cells);
      v.emplace_back(x, y, height(x, y));
    }
  }
  std::vector<Face> f;
  f.reserve(2 * cells * cells);
  for (std::size_t r = 0; r < cells; ++r) {
    for (std::size_t c = 0; c < cells; ++c) {
      const auto a = static_cast<std::uint32_t>(r * side + c);
      const auto b = a + 1, d = static_cast<std::uint32_t>(a + side), e = d + 1;
      f.push_back({a, b, e});
      f.push_back({a, e, d});
    }
  }
  return {std::move(v), std::move(f)};
}

TriangleMesh cylinder(double radius, double length, std::size_t around, std::size_t along) {
  if (!(radius > 0.0) || !(length > 0.0) || around < 3 || along < 1) {
    throw Error(ErrorCode::InvalidArgument, "cylinder needs radius, length > 0, around >= 3, along >= 1");
  }
  std::vector<Point3> v;
  for (std::size_t r = 0; r <= along; ++r) {
    const double z = -length / 2.0 + length * static_cast<double>(r) / static_cast<double>(along);
    for (std::size_t k = 0; k < around; ++k) {
      const double a = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(around);
      v.emplace_back(radius * std::cos(a), radius * std::sin(a), z);
    }
  }
  std::vector<Face> f;
  for (std::size_t r = 0; r < along; ++r) {
    for (std::size_t k = 0; k < around; ++k) {
      const auto a = static_cast<std::uint32_t>(r * around + k);
      const auto b = static_cast<std::uint32_t>(r * around + (k + 1) % around);
      const auto c = static_cast<std::uint32_t>(a + around), d = static_cast<std::uint32_t>(b + around);
      f.push_back({a, b, d});
      f.push_back({a, d, c});
    }
  }
  return {std::move(v), std::move(f)};
}

double dome_height(double x, double y, std::span<const Bump> bumps) {
  // Compactly supported dome, so the rim of the grid is flat.
  const double r2 = (x * x + y * y) / (0.9 * 0.9);
  double z = r2 < 1.0 ? 0.3 * std::pow(1.0 - r2, 4) : 0.0;
  for (const Bump& b : bumps) {
    const double d2 = (x - b.x) * (x - b.x) + (y - b.y) * (y - b.y);
    z += b.height * std::exp(-d2 / (2.0 * b.width * b.width));
  }
  return z;
}

FacialTriangle standard_face_triangle() {
  return {feature_point(kEyeLeft), feature_point(kEyeRight), feature_point(kNose)};
}

std::vector<BatteryModel> face_battery(std::uint64_t seed, std::size_t per_class, std::size_t cells) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto jitter = [&](double amount) { return amount * (2.0 * unit(rng) - 1.0); };
  auto jittered = [&](const Bump& b) {
    return Bump{b.x + jitter(0.03), b.y + jitter(0.03), b.height * (1.0 + jitter(0.2)), b.width * (1.0 + jitter(0.15))};
  };

  std::vector<BatteryModel> out;
  for (std::size_t m = 0; m < 2 * per_class; ++m) {
    const bool face = m < per_class;
    std::vector<Bump> bumps;
    std::string kind;
    if (face) {
      bumps = {jittered(kEyeLeft), jittered(kEyeRight), jittered(kNose)};
      kind = "face";
    } else {
      switch (m % 3) {
        case 0:
          kind = "plain";
          break;
        case 1:
          bumps = {jittered(kEyeLeft), jittered(kEyeRight)};
          kind = "two-bumps";
          break;
        default: {
          const double angle = kPi * unit(rng);
          const int count = 3 + static_cast<int>(m % 2);
          for (int k = 0; k < count; ++k) {
            const double s = -0.5 + static_cast<double>(k) / (count - 1);
            bumps.push_back(jittered({s * std::cos(angle), s * std::sin(angle), 0.08, 0.07}));
          }
          kind = "row";
          break;
        }
      }
    }
    const TriangleMesh base = height_grid(cells, 1.0, [&](double x, double y) { return dome_height(x, y, bumps); });
    const Eigen::Vector3d axis = Eigen::Vector3d(jitter(1.0), jitter(1.0), jitter(1.0)).normalized();
    const Eigen::Matrix3d r = Eigen::AngleAxisd(kPi * unit(rng), axis).toRotationMatrix();
    const Eigen::Vector3d t(jitter(2.0), jitter(2.0), jitter(2.0));
    const double scale = std::exp(jitter(std::log(3.0)));
    out.push_back({moved(base, r, t, scale), face, kind});
  }
  return out;
}

}  // namespace mvreg::synthetic

#include "mvreg/section.hpp"

#include <cmath>
#include <fmt/format.h>

#include "mvreg/error.hpp"

namespace mvreg {

Axis parse_axis(const std::string& name) {
  if (name == "x") return Axis::X;
  if (name == "y") return Axis::Y;
  if (name == "z") return Axis::Z;
  throw Error(ErrorCode::InvalidArgument, fmt::format("axis must be x, y or z, got '{}'", name));
}

std::vector<SectionPoint> cross_section(std::span<const PointCloud> clouds, Axis axis, double position,
                                        double thickness) {
  if (!(thickness > 0.0)) throw Error(ErrorCode::InvalidArgument, "section thickness must be positive");
  const int a = static_cast<int>(axis);
  const int u = (a + 1) % 3, v = (a + 2) % 3;
  std::vector<SectionPoint> out;
  for (std::size_t view = 0; view < clouds.size(); ++view) {
    for (const Point3& p : clouds[view].points()) {
      if (std::abs(p(a) - position) <= thickness / 2.0) out.push_back({view, p(u), p(v)});
    }
  }
  return out;
}

std::string format_section(std::span<const SectionPoint> points) {
  std::string out = "view,u,v\n";
  for (const SectionPoint& p : points) out += fmt::format("{},{:.9e},{:.9e}\n", p.view, p.u, p.v);
  return out;
}

}  // namespace mvreg

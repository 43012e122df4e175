#pragma once

#include <span>
#include <string>
#include <vector>

#include "mvreg/point_cloud.hpp"

namespace mvreg {

enum class Axis { X, Y, Z };

Axis parse_axis(const std::string& name);

struct SectionPoint {
  std::size_t view = 0;
  double u = 0.0;
  double v = 0.0;
};

/// Points with |coordinate(axis) - position| <= thickness / 2, projected onto
/// the two remaining coordinates in cyclic order (x -> (y, z), y -> (z, x),
/// z -> (x, y)) and tagged with their cloud index. Clouds are taken as given,
/// so pass them already placed in a common frame.
std::vector<SectionPoint> cross_section(std::span<const PointCloud> clouds, Axis axis, double position,
                                        double thickness);

/// "view,u,v" header and one row per point.
std::string format_section(std::span<const SectionPoint> points);

}  // namespace mvreg

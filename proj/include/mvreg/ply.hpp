#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "mvreg/geometry.hpp"
#include "mvreg/mesh.hpp"

namespace mvreg {

struct PlyScalar {
  std::string name;
  std::vector<double> values;
};

/// Vertices, optional triangles, and optional extra per-vertex scalars. Only
/// scalars that are explicitly requested by writers end up here; unknown
/// properties are skipped on read.
struct PlyDocument {
  std::vector<Point3> vertices;
  std::vector<Face> faces;
  std::vector<PlyScalar> scalars;
};

enum class PlyEncoding { Ascii, BinaryLittleEndian };
enum class PlyPrecision { Float32, Float64 };

struct PlyWriteOptions {
  PlyEncoding encoding = PlyEncoding::BinaryLittleEndian;
  PlyPrecision precision = PlyPrecision::Float64;
};

/// Reads ASCII or binary little-endian PLY. x, y, z must be float or double;
/// polygons are split into triangle fans. Throws MalformedHeader,
/// CountMismatch, UnsupportedFormat (big endian, integer coordinates) or
/// IoError.
PlyDocument read_ply(const std::filesystem::path& path);
PlyDocument parse_ply(std::istream& in);

void write_ply(const PlyDocument& doc, const std::filesystem::path& path, const PlyWriteOptions& options = {});
void write_ply(const PlyDocument& doc, std::ostream& out, const PlyWriteOptions& options = {});

}  // namespace mvreg

#include "mvreg/ply.hpp"

#include <bit>
#include <cstring>
#include <fmt/format.h>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include "mvreg/error.hpp"

namespace mvreg {

namespace {

enum class Type { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

std::optional<Type> parse_type(const std::string& name) {
  if (name == "char" || name == "int8") return Type::Int8;
  if (name == "uchar" || name == "uint8") return Type::UInt8;
  if (name == "short" || name == "int16") return Type::Int16;
  if (name == "ushort" || name == "uint16") return Type::UInt16;
  if (name == "int" || name == "int32") return Type::Int32;
  if (name == "uint" || name == "uint32") return Type::UInt32;
  if (name == "float" || name == "float32") return Type::Float32;
  if (name == "double" || name == "float64") return Type::Float64;
  return std::nullopt;
}

std::size_t size_of(Type t) {
  switch (t) {
    case Type::Int8:
    case Type::UInt8:
      return 1;
    case Type::Int16:
    case Type::UInt16:
      return 2;
    case Type::Int32:
    case Type::UInt32:
    case Type::Float32:
      return 4;
    case Type::Float64:
      return 8;
  }
  return 0;
}

bool is_float(Type t) { return t == Type::Float32 || t == Type::Float64; }

struct Property {
  std::string name;
  Type type = Type::Float32;
  bool list = false;
  Type count_type = Type::UInt8;
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> properties;
};

template <class T>
double load(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return static_cast<double>(v);
}

double decode(Type t, const char* p) {
  switch (t) {
    case Type::Int8:
      return load<std::int8_t>(p);
    case Type::UInt8:
      return load<std::uint8_t>(p);
    case Type::Int16:
      return load<std::int16_t>(p);
    case Type::UInt16:
      return load<std::uint16_t>(p);
    case Type::Int32:
      return load<std::int32_t>(p);
    case Type::UInt32:
      return load<std::uint32_t>(p);
    case Type::Float32:
      return load<float>(p);
    case Type::Float64:
      return load<double>(p);
  }
  return 0.0;
}

// Reads one property value (or list) from the body, either encoding.
class BodyReader {
 public:
  BodyReader(std::istream& in, bool binary) : in_(in), binary_(binary) {}

  // Starts a record; ASCII records are one line each.
  void begin_record(const std::string& element, std::size_t index) {
    if (binary_) return;
    std::string line;
    do {
      if (!std::getline(in_, line)) {
        throw Error(ErrorCode::CountMismatch,
                    fmt::format("body ends before {} record {} of the declared count", element, index));
      }
    } while (line.find_first_not_of(" \t\r") == std::string::npos);
    tokens_.clear();
    tokens_.str(line);
    where_ = fmt::format("{} record {}", element, index);
  }

  void end_record() {
    if (binary_) return;
    std::string extra;
    if (tokens_ >> extra) throw Error(ErrorCode::CountMismatch, fmt::format("{} has extra values", where_));
  }

  double value(Type t) {
    if (binary_) {
      char buf[8];
      if (!in_.read(buf, static_cast<std::streamsize>(size_of(t)))) {
        throw Error(ErrorCode::CountMismatch, "binary body is shorter than the header declares");
      }
      return decode(t, buf);
    }
    std::string token;
    if (!(tokens_ >> token)) throw Error(ErrorCode::CountMismatch, fmt::format("{} has too few values", where_));
    try {
      std::size_t used = 0;
      const double v = std::stod(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
      return t == Type::Float32 ? static_cast<double>(static_cast<float>(v)) : v;
    } catch (const std::exception&) {
      throw Error(ErrorCode::CountMismatch, fmt::format("{}: '{}' is not a number", where_, token));
    }
  }

  void finish() {
    if (binary_) {
      if (in_.peek() != std::char_traits<char>::eof()) {
        throw Error(ErrorCode::CountMismatch, "binary body is longer than the header declares");
      }
      return;
    }
    std::string rest;
    while (in_ >> rest) throw Error(ErrorCode::CountMismatch, "body holds more records than the header declares");
  }

 private:
  std::istream& in_;
  bool binary_;
  std::istringstream tokens_;
  std::string where_;
};

std::vector<Element> parse_header(std::istream& in, bool& binary) {
  std::string line;
  if (!std::getline(in, line) || line.substr(0, 3) != "ply" || line.find_first_not_of(" \t\r", 3) != std::string::npos) {
    throw Error(ErrorCode::MalformedHeader, "missing 'ply' magic line");
  }
  std::vector<Element> elements;
  bool have_format = false;
  for (;;) {
    if (!std::getline(in, line)) throw Error(ErrorCode::MalformedHeader, "header has no end_header line");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream words(line);
    std::string key;
    if (!(words >> key)) continue;
    if (key == "end_header") break;
    if (key == "comment" || key == "obj_info") continue;
    if (key == "format") {
      std::string kind, version;
      if (!(words >> kind >> version)) throw Error(ErrorCode::MalformedHeader, "incomplete format line");
      if (kind == "ascii") {
        binary = false;
      } else if (kind == "binary_little_endian") {
        binary = true;
      } else if (kind == "binary_big_endian") {
        throw Error(ErrorCode::UnsupportedFormat, "binary_big_endian PLY is not supported");
      } else {
        throw Error(ErrorCode::MalformedHeader, fmt::format("unknown format '{}'", kind));
      }
      have_format = true;
    } else if (key == "element") {
      Element e;
      long long count = -1;
      if (!(words >> e.name >> count) || count < 0) throw Error(ErrorCode::MalformedHeader, fmt::format("bad element line '{}'", line));
      e.count = static_cast<std::size_t>(count);
      elements.push_back(std::move(e));
    } else if (key == "property") {
      if (elements.empty()) throw Error(ErrorCode::MalformedHeader, "property before any element");
      Property p;
      std::string type;
      if (!(words >> type)) throw Error(ErrorCode::MalformedHeader, "empty property line");
      if (type == "list") {
        std::string count_type, item_type;
        if (!(words >> count_type >> item_type >> p.name)) throw Error(ErrorCode::MalformedHeader, fmt::format("bad list property '{}'", line));
        const auto c = parse_type(count_type), t = parse_type(item_type);
        if (!c || !t || is_float(*c)) throw Error(ErrorCode::MalformedHeader, fmt::format("bad list types in '{}'", line));
        p.list = true;
        p.count_type = *c;
        p.type = *t;
      } else {
        const auto t = parse_type(type);
        if (!t || !(words >> p.name)) throw Error(ErrorCode::MalformedHeader, fmt::format("bad property line '{}'", line));
        p.type = *t;
      }
      elements.back().properties.push_back(std::move(p));
    } else {
      throw Error(ErrorCode::MalformedHeader, fmt::format("unknown header keyword '{}'", key));
    }
  }
  if (!have_format) throw Error(ErrorCode::MalformedHeader, "header has no format line");
  return elements;
}

}  // namespace

PlyDocument parse_ply(std::istream& in) {
  if constexpr (std::endian::native != std::endian::little) {
    throw Error(ErrorCode::UnsupportedFormat, "PLY support assumes a little-endian host");
  }
  bool binary = false;
  const std::vector<Element> elements = parse_header(in, binary);

  PlyDocument doc;
  bool seen_vertex = false;
  BodyReader body(in, binary);
  for (const Element& e : elements) {
    if (e.name == "vertex") {
      if (seen_vertex) throw Error(ErrorCode::MalformedHeader, "more than one vertex element");
      seen_vertex = true;
      int axis_of[3] = {-1, -1, -1};
      for (std::size_t k = 0; k < e.properties.size(); ++k) {
        const Property& p = e.properties[k];
        const int axis = p.name == "x" ? 0 : p.name == "y" ? 1 : p.name == "z" ? 2 : -1;
        if (axis < 0) continue;
        if (p.list) throw Error(ErrorCode::MalformedHeader, "vertex coordinate declared as a list");
        if (!is_float(p.type)) throw Error(ErrorCode::UnsupportedFormat, "vertex coordinates must be float or double");
        axis_of[axis] = static_cast<int>(k);
      }
      if (axis_of[0] < 0 || axis_of[1] < 0 || axis_of[2] < 0) {
        throw Error(ErrorCode::MalformedHeader, "vertex element lacks x, y or z");
      }
      doc.vertices.resize(e.count);
      for (std::size_t r = 0; r < e.count; ++r) {
        body.begin_record(e.name, r);
        for (std::size_t k = 0; k < e.properties.size(); ++k) {
          const Property& p = e.properties[k];
          if (p.list) {
            const double n = body.value(p.count_type);
            for (double i = 0; i < n; ++i) body.value(p.type);
            continue;
          }
          const double v = body.value(p.type);
          for (int a = 0; a < 3; ++a) {
            if (axis_of[a] == static_cast<int>(k)) doc.vertices[r](a) = v;
          }
        }
        body.end_record();
      }
    } else if (e.name == "face") {
      for (std::size_t r = 0; r < e.count; ++r) {
        body.begin_record(e.name, r);
        for (const Property& p : e.properties) {
          if (!p.list) {
            body.value(p.type);
            continue;
          }
          const double n = body.value(p.count_type);
          std::vector<std::uint32_t> poly;
          for (double i = 0; i < n; ++i) {
            const double v = body.value(p.type);
            if (p.name == "vertex_indices" || p.name == "vertex_index") {
              if (!(v >= 0.0) || v > std::numeric_limits<std::uint32_t>::max()) {
                throw Error(ErrorCode::CountMismatch, fmt::format("face {} has index {}", r, v));
              }
              poly.push_back(static_cast<std::uint32_t>(v));
            }
          }
          if (p.name != "vertex_indices" && p.name != "vertex_index") continue;
          if (poly.size() < 3) throw Error(ErrorCode::CountMismatch, fmt::format("face {} has {} vertices", r, poly.size()));
          for (std::size_t k = 1; k + 1 < poly.size(); ++k) doc.faces.push_back({poly[0], poly[k], poly[k + 1]});
        }
        body.end_record();
      }
    } else {
      for (std::size_t r = 0; r < e.count; ++r) {
        body.begin_record(e.name, r);
        for (const Property& p : e.properties) {
          const double n = p.list ? body.value(p.count_type) : 1.0;
          for (double i = 0; i < n; ++i) body.value(p.type);
        }
        body.end_record();
      }
    }
  }
  if (!seen_vertex) throw Error(ErrorCode::MalformedHeader, "no vertex element");
  body.finish();
  for (const Face& f : doc.faces) {
    for (std::uint32_t v : f) {
      if (v >= doc.vertices.size()) throw Error(ErrorCode::CountMismatch, fmt::format("face index {} out of range", v));
    }
  }
  return doc;
}

PlyDocument read_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, fmt::format("cannot open '{}'", path.string()));
  return parse_ply(in);
}

void write_ply(const PlyDocument& doc, std::ostream& out, const PlyWriteOptions& options) {
  for (const PlyScalar& s : doc.scalars) {
    if (s.values.size() != doc.vertices.size()) {
      throw Error(ErrorCode::ShapeMismatch, fmt::format("scalar '{}' has {} values for {} vertices", s.name,
                                                        s.values.size(), doc.vertices.size()));
    }
  }
  const bool binary = options.encoding == PlyEncoding::BinaryLittleEndian;
  const bool wide = options.precision == PlyPrecision::Float64;
  const char* type = wide ? "double" : "float";
  out << "ply\nformat " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n";
  out << "element vertex " << doc.vertices.size() << "\n";
  for (const char* axis : {"x", "y", "z"}) out << "property " << type << " " << axis << "\n";
  for (const PlyScalar& s : doc.scalars) out << "property " << type << " " << s.name << "\n";
  if (!doc.faces.empty()) out << "element face " << doc.faces.size() << "\nproperty list uchar int vertex_indices\n";
  out << "end_header\n";

  auto put = [&](double v) {
    if (binary) {
      if (wide) {
        out.write(reinterpret_cast<const char*>(&v), sizeof v);
      } else {
        const float f = static_cast<float>(v);
        out.write(reinterpret_cast<const char*>(&f), sizeof f);
      }
    } else {
      out << (wide ? fmt::format("{}", v) : fmt::format("{}", static_cast<float>(v)));
    }
  };
  for (std::size_t k = 0; k < doc.vertices.size(); ++k) {
    std::vector<double> row = {doc.vertices[k].x(), doc.vertices[k].y(), doc.vertices[k].z()};
    for (const PlyScalar& s : doc.scalars) row.push_back(s.values[k]);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (!binary && c > 0) out << ' ';
      put(row[c]);
    }
    if (!binary) out << '\n';
  }
  for (const Face& f : doc.faces) {
    if (binary) {
      const std::uint8_t n = 3;
      out.write(reinterpret_cast<const char*>(&n), 1);
      for (std::uint32_t v : f) {
        const auto i = static_cast<std::int32_t>(v);
        out.write(reinterpret_cast<const char*>(&i), sizeof i);
      }
    } else {
      out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
    }
  }
}

void write_ply(const PlyDocument& doc, const std::filesystem::path& path, const PlyWriteOptions& options) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, fmt::format("cannot write '{}'", path.string()));
  write_ply(doc, out, options);
  if (!out) throw Error(ErrorCode::IoError, fmt::format("write to '{}' failed", path.string()));
}

}  // namespace mvreg

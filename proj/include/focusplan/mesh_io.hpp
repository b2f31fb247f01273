#pragma once

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "focusplan/mesh.hpp"

namespace focusplan {

enum class MeshFormat { kObj, kPly };

struct MeshLoadResult {
  Mesh mesh;
  std::size_t dropped_degenerate = 0;
};

namespace detail {

inline bool iequals(const std::string& a, const char* b) {
  const std::size_t n = std::strlen(b);
  if (a.size() != n) return false;
  for (std::size_t i = 0; i < n; ++i)
    if (std::tolower(static_cast<unsigned char>(a[i])) != b[i]) return false;
  return true;
}

// ---- OBJ ----------------------------------------------------------------

inline MeshLoadResult load_obj(std::istream& in, const std::string& path, double unit_scale) {
  Mesh mesh;
  std::string line;
  std::size_t lineno = 0;

  auto resolve_index = [&](long idx, std::size_t count) -> std::uint32_t {
    // OBJ indices are 1-based; negative indices count from the end.
    long r = idx > 0 ? idx - 1 : static_cast<long>(count) + idx;
    if (r < 0 || r >= static_cast<long>(count))
      throw FormatError(path, lineno, "face index out of range");
    return static_cast<std::uint32_t>(r);
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) throw FormatError(path, lineno, "malformed vertex");
      mesh.vertices.emplace_back(x * unit_scale, y * unit_scale, z * unit_scale);
    } else if (tag == "vn") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) throw FormatError(path, lineno, "malformed normal");
      mesh.vertex_normals.emplace_back(Vec3(x, y, z).normalized());
    } else if (tag == "f") {
      std::vector<std::uint32_t> poly;
      std::string corner;
      while (ls >> corner) {
        // "v", "v/vt", "v//vn", "v/vt/vn" -- only the vertex index matters here
        const std::size_t slash = corner.find('/');
        const std::string vpart = slash == std::string::npos ? corner : corner.substr(0, slash);
        try {
          poly.push_back(resolve_index(std::stol(vpart), mesh.vertices.size()));
        } catch (const std::invalid_argument&) {
          throw FormatError(path, lineno, "malformed face corner '" + corner + "'");
        } catch (const std::out_of_range&) {
          throw FormatError(path, lineno, "face index out of range");
        }
      }
      if (poly.size() < 3) throw FormatError(path, lineno, "face with fewer than 3 corners");
      for (std::size_t k = 1; k + 1 < poly.size(); ++k)
        mesh.triangles.push_back({poly[0], poly[k], poly[k + 1]});
    }
    // all other tags (vt, o, g, s, usemtl, mtllib, ...) are ignored
  }

  if (!mesh.vertex_normals.empty() && mesh.vertex_normals.size() != mesh.vertices.size())
    mesh.vertex_normals.clear();  // per-corner normals do not map 1:1; discard

  MeshLoadResult result;
  result.mesh = std::move(mesh);
  result.dropped_degenerate = result.mesh.remove_degenerate_triangles();
  result.mesh.validate();
  return result;
}

// ---- PLY ----------------------------------------------------------------

enum class PlyType { kInt8, kUint8, kInt16, kUint16, kInt32, kUint32, kFloat32, kFloat64 };

inline PlyType ply_type_from(const std::string& s, const std::string& path, std::size_t lineno) {
  if (s == "char" || s == "int8") return PlyType::kInt8;
  if (s == "uchar" || s == "uint8") return PlyType::kUint8;
  if (s == "short" || s == "int16") return PlyType::kInt16;
  if (s == "ushort" || s == "uint16") return PlyType::kUint16;
  if (s == "int" || s == "int32") return PlyType::kInt32;
  if (s == "uint" || s == "uint32") return PlyType::kUint32;
  if (s == "float" || s == "float32") return PlyType::kFloat32;
  if (s == "double" || s == "float64") return PlyType::kFloat64;
  throw FormatError(path, lineno, "unsupported ply property type '" + s + "'");
}

inline std::size_t ply_type_size(PlyType t) {
  switch (t) {
    case PlyType::kInt8:
    case PlyType::kUint8:
      return 1;
    case PlyType::kInt16:
    case PlyType::kUint16:
      return 2;
    case PlyType::kInt32:
    case PlyType::kUint32:
    case PlyType::kFloat32:
      return 4;
    case PlyType::kFloat64:
      return 8;
  }
  return 0;
}

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::kFloat32;
  bool is_list = false;
  PlyType count_type = PlyType::kUint8;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

inline double ply_read_binary_scalar(std::istream& in, PlyType t, const std::string& path) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(ply_type_size(t)));
  if (!in) throw FormatError(path, 0, "unexpected end of binary ply payload");
  switch (t) {
    case PlyType::kInt8: {
      std::int8_t v;
      std::memcpy(&v, buf, 1);
      return v;
    }
    case PlyType::kUint8:
      return buf[0];
    case PlyType::kInt16: {
      std::int16_t v;
      std::memcpy(&v, buf, 2);
      return v;
    }
    case PlyType::kUint16: {
      std::uint16_t v;
      std::memcpy(&v, buf, 2);
      return v;
    }
    case PlyType::kInt32: {
      std::int32_t v;
      std::memcpy(&v, buf, 4);
      return v;
    }
    case PlyType::kUint32: {
      std::uint32_t v;
      std::memcpy(&v, buf, 4);
      return v;
    }
    case PlyType::kFloat32: {
      float v;
      std::memcpy(&v, buf, 4);
      return v;
    }
    case PlyType::kFloat64: {
      double v;
      std::memcpy(&v, buf, 8);
      return v;
    }
  }
  return 0.0;
}

inline MeshLoadResult load_ply(std::istream& in, const std::string& path, double unit_scale) {
  std::string line;
  std::size_t lineno = 0;
  bool binary = false;

  std::getline(in, line);
  ++lineno;
  if (line.size() >= 3 && line.back() == '\r') line.pop_back();
  if (line != "ply") throw FormatError(path, lineno, "missing ply magic");

  std::vector<PlyElement> elements;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "comment" || tag == "obj_info") continue;
    if (tag == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "ascii")
        binary = false;
      else if (fmt == "binary_little_endian")
        binary = true;
      else
        throw FormatError(path, lineno, "unsupported ply format '" + fmt + "'");
    } else if (tag == "element") {
      PlyElement el;
      if (!(ls >> el.name >> el.count)) throw FormatError(path, lineno, "malformed element");
      elements.push_back(el);
    } else if (tag == "property") {
      if (elements.empty()) throw FormatError(path, lineno, "property before element");
      PlyProperty prop;
      std::string t;
      ls >> t;
      if (t == "list") {
        prop.is_list = true;
        std::string ct, vt;
        if (!(ls >> ct >> vt >> prop.name)) throw FormatError(path, lineno, "malformed list property");
        prop.count_type = ply_type_from(ct, path, lineno);
        prop.type = ply_type_from(vt, path, lineno);
      } else {
        prop.type = ply_type_from(t, path, lineno);
        if (!(ls >> prop.name)) throw FormatError(path, lineno, "malformed property");
      }
      elements.back().properties.push_back(prop);
    } else if (tag == "end_header") {
      break;
    } else if (!tag.empty()) {
      throw FormatError(path, lineno, "unknown header tag '" + tag + "'");
    }
  }

  Mesh mesh;
  auto read_scalar = [&](PlyType t) -> double {
    if (binary) return ply_read_binary_scalar(in, t, path);
    double v;
    if (!(in >> v)) throw FormatError(path, lineno, "unexpected end of ascii ply payload");
    return v;
  };

  for (const PlyElement& el : elements) {
    if (el.name == "vertex") {
      int ix = -1, iy = -1, iz = -1, inx = -1, iny = -1, inz = -1;
      for (std::size_t p = 0; p < el.properties.size(); ++p) {
        const std::string& n = el.properties[p].name;
        if (n == "x") ix = static_cast<int>(p);
        if (n == "y") iy = static_cast<int>(p);
        if (n == "z") iz = static_cast<int>(p);
        if (n == "nx") inx = static_cast<int>(p);
        if (n == "ny") iny = static_cast<int>(p);
        if (n == "nz") inz = static_cast<int>(p);
      }
      if (ix < 0 || iy < 0 || iz < 0) throw FormatError(path, lineno, "vertex element lacks x/y/z");
      const bool has_normals = inx >= 0 && iny >= 0 && inz >= 0;
      mesh.vertices.reserve(el.count);
      if (has_normals) mesh.vertex_normals.reserve(el.count);
      std::vector<double> scratch(el.properties.size());
      for (std::size_t i = 0; i < el.count; ++i) {
        for (std::size_t p = 0; p < el.properties.size(); ++p) {
          if (el.properties[p].is_list) {
            const auto n = static_cast<std::size_t>(read_scalar(el.properties[p].count_type));
            for (std::size_t k = 0; k < n; ++k) read_scalar(el.properties[p].type);
            scratch[p] = 0.0;
          } else {
            scratch[p] = read_scalar(el.properties[p].type);
          }
        }
        mesh.vertices.emplace_back(scratch[ix] * unit_scale, scratch[iy] * unit_scale,
                                   scratch[iz] * unit_scale);
        if (has_normals) {
          Vec3 n(scratch[inx], scratch[iny], scratch[inz]);
          const double len = n.norm();
          mesh.vertex_normals.push_back(len > 0 ? Vec3(n / len) : Vec3(0, 0, 1));
        }
      }
    } else if (el.name == "face") {
      for (std::size_t i = 0; i < el.count; ++i) {
        for (const PlyProperty& prop : el.properties) {
          if (prop.is_list && (prop.name == "vertex_indices" || prop.name == "vertex_index")) {
            const auto n = static_cast<std::size_t>(read_scalar(prop.count_type));
            if (n < 3) throw FormatError(path, lineno, "face with fewer than 3 corners");
            std::vector<std::uint32_t> poly(n);
            for (std::size_t k = 0; k < n; ++k) {
              const double v = read_scalar(prop.type);
              if (v < 0 || v >= static_cast<double>(mesh.vertices.size()))
                throw FormatError(path, lineno, "face index out of range");
              poly[k] = static_cast<std::uint32_t>(v);
            }
            for (std::size_t k = 1; k + 1 < n; ++k)
              mesh.triangles.push_back({poly[0], poly[k], poly[k + 1]});
          } else if (prop.is_list) {
            const auto n = static_cast<std::size_t>(read_scalar(prop.count_type));
            for (std::size_t k = 0; k < n; ++k) read_scalar(prop.type);
          } else {
            read_scalar(prop.type);
          }
        }
      }
    } else {
      // unknown element: consume its payload
      for (std::size_t i = 0; i < el.count; ++i) {
        for (const PlyProperty& prop : el.properties) {
          if (prop.is_list) {
            const auto n = static_cast<std::size_t>(read_scalar(prop.count_type));
            for (std::size_t k = 0; k < n; ++k) read_scalar(prop.type);
          } else {
            read_scalar(prop.type);
          }
        }
      }
    }
  }

  MeshLoadResult result;
  result.mesh = std::move(mesh);
  result.dropped_degenerate = result.mesh.remove_degenerate_triangles();
  result.mesh.validate();
  return result;
}

}  // namespace detail

inline MeshFormat mesh_format_from_path(const std::string& path) {
  const std::size_t dot = path.find_last_of('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  if (detail::iequals(ext, "obj")) return MeshFormat::kObj;
  if (detail::iequals(ext, "ply")) return MeshFormat::kPly;
  throw ValidationError("cannot infer mesh format from path '" + path + "'");
}

inline MeshLoadResult load_mesh(const std::string& path, MeshFormat format,
                                double unit_scale = 1.0) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError("cannot open mesh file '" + path + "'");
  switch (format) {
    case MeshFormat::kObj:
      return detail::load_obj(in, path, unit_scale);
    case MeshFormat::kPly:
      return detail::load_ply(in, path, unit_scale);
  }
  throw ValidationError("unreachable mesh format");
}

inline MeshLoadResult load_mesh(const std::string& path, double unit_scale = 1.0) {
  return load_mesh(path, mesh_format_from_path(path), unit_scale);
}

inline void save_obj(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FileError("cannot open '" + path + "' for writing");
  out.precision(9);
  for (const Vec3& v : mesh.vertices) out << "v " << v.x() << " " << v.y() << " " << v.z() << "\n";
  for (const auto& t : mesh.triangles)
    out << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
}

inline void save_ply(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError("cannot open '" + path + "' for writing");
  out << "ply\nformat binary_little_endian 1.0\n";
  out << "element vertex " << mesh.vertices.size() << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  out << "element face " << mesh.triangles.size() << "\n";
  out << "property list uchar uint vertex_indices\n";
  out << "end_header\n";
  for (const Vec3& v : mesh.vertices) {
    const float xyz[3] = {static_cast<float>(v.x()), static_cast<float>(v.y()),
                          static_cast<float>(v.z())};
    out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
  }
  for (const auto& t : mesh.triangles) {
    const unsigned char n = 3;
    out.write(reinterpret_cast<const char*>(&n), 1);
    const std::uint32_t idx[3] = {t[0], t[1], t[2]};
    out.write(reinterpret_cast<const char*>(idx), sizeof(idx));
  }
}

}  // namespace focusplan

#include "dflow/geometry/io.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dflow/binary_io.hpp"
#include "dflow/errors.hpp"

namespace dflow {
namespace {

using detail::read_le;
using detail::write_le;

std::string lower_extension(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

TriMesh read_obj(std::istream& in, const std::string& source) {
  std::vector<Point3> vertices;
  std::vector<Face> faces;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    auto fail = [&](const std::string& what) {
      return InvalidInput(source + ":" + std::to_string(line_no) + ": " + what);
    };
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) throw fail("malformed vertex");
      vertices.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::vector<std::int32_t> poly;
      std::string token;
      while (ls >> token) {
        const auto slash = token.find('/');
        long idx = 0;
        try {
          idx = std::stol(token.substr(0, slash));
        } catch (const std::exception&) {
          throw fail("malformed face index '" + token + "'");
        }
        if (idx < 0) idx = static_cast<long>(vertices.size()) + idx + 1;
        if (idx < 1) throw fail("face index out of range");
        poly.push_back(static_cast<std::int32_t>(idx - 1));
      }
      if (poly.size() < 3) throw fail("face with fewer than 3 vertices");
      for (std::size_t c = 1; c + 1 < poly.size(); ++c) {
        faces.push_back({poly[0], poly[c], poly[c + 1]});
      }
    }
  }
  try {
    return TriMesh(std::move(vertices), std::move(faces));
  } catch (const InvalidInput& e) {
    throw InvalidInput(source + ": " + e.what());
  }
}

void write_obj(std::ostream& out, const TriMesh& mesh) {
  for (const auto& v : mesh.vertices()) {
    out << "v " << format_double(v.x()) << ' ' << format_double(v.y()) << ' '
        << format_double(v.z()) << '\n';
  }
  for (const auto& f : mesh.faces()) {
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  }
}

namespace {

struct PlyProperty {
  std::string name;
  std::string type;
  std::string list_count_type;  // empty unless this is a list property
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

std::size_t ply_type_size(const std::string& type) {
  if (type == "char" || type == "uchar" || type == "int8" || type == "uint8") return 1;
  if (type == "short" || type == "ushort" || type == "int16" || type == "uint16") return 2;
  if (type == "int" || type == "uint" || type == "float" || type == "int32" ||
      type == "uint32" || type == "float32") return 4;
  if (type == "double" || type == "float64") return 8;
  return 0;
}

double read_ply_scalar(std::istream& in, const std::string& type, const std::string& source) {
  if (type == "char" || type == "int8") return read_le<std::int8_t>(in, source);
  if (type == "uchar" || type == "uint8") return read_le<std::uint8_t>(in, source);
  if (type == "short" || type == "int16") return read_le<std::int16_t>(in, source);
  if (type == "ushort" || type == "uint16") return read_le<std::uint16_t>(in, source);
  if (type == "int" || type == "int32") return read_le<std::int32_t>(in, source);
  if (type == "uint" || type == "uint32") return read_le<std::uint32_t>(in, source);
  if (type == "float" || type == "float32") return read_le<float>(in, source);
  if (type == "double" || type == "float64") return read_le<double>(in, source);
  throw InvalidInput(source + ": unsupported PLY type " + type);
}

}  // namespace

TriMesh read_ply(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0) {
    throw InvalidInput(source + ": missing PLY magic");
  }
  std::vector<PlyElement> elements;
  bool binary_le = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "format") {
      std::string fmt;
      ls >> fmt;
      binary_le = fmt == "binary_little_endian";
    } else if (tag == "element") {
      PlyElement e;
      ls >> e.name >> e.count;
      elements.push_back(e);
    } else if (tag == "property") {
      if (elements.empty()) throw InvalidInput(source + ": property before element");
      PlyProperty p;
      std::string type;
      ls >> type;
      if (type == "list") {
        ls >> p.list_count_type >> p.type >> p.name;
      } else {
        p.type = type;
        ls >> p.name;
      }
      elements.back().properties.push_back(p);
    } else if (tag == "end_header") {
      break;
    }
  }
  if (!binary_le) throw InvalidInput(source + ": only binary_little_endian PLY is supported");

  std::vector<Point3> vertices;
  std::vector<Face> faces;
  for (const auto& element : elements) {
    for (std::size_t n = 0; n < element.count; ++n) {
      Point3 p = Point3::Zero();
      std::vector<std::int32_t> poly;
      for (const auto& prop : element.properties) {
        if (!prop.list_count_type.empty()) {
          const auto count = static_cast<std::size_t>(read_ply_scalar(in, prop.list_count_type, source));
          std::vector<std::int32_t> values(count);
          for (auto& v : values) v = static_cast<std::int32_t>(read_ply_scalar(in, prop.type, source));
          if (element.name == "face" &&
              (prop.name == "vertex_indices" || prop.name == "vertex_index")) {
            poly = std::move(values);
          }
        } else {
          if (ply_type_size(prop.type) == 0) throw InvalidInput(source + ": bad PLY type " + prop.type);
          const double v = read_ply_scalar(in, prop.type, source);
          if (element.name == "vertex") {
            if (prop.name == "x") p.x() = v;
            else if (prop.name == "y") p.y() = v;
            else if (prop.name == "z") p.z() = v;
          }
        }
      }
      if (element.name == "vertex") vertices.push_back(p);
      if (element.name == "face") {
        if (poly.size() < 3) throw InvalidInput(source + ": face with fewer than 3 vertices");
        for (std::size_t c = 1; c + 1 < poly.size(); ++c) faces.push_back({poly[0], poly[c], poly[c + 1]});
      }
    }
  }
  try {
    return TriMesh(std::move(vertices), std::move(faces));
  } catch (const InvalidInput& e) {
    throw InvalidInput(source + ": " + e.what());
  }
}

void write_ply(std::ostream& out, const TriMesh& mesh) {
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << mesh.vertex_count() << "\n"
      << "property float x\nproperty float y\nproperty float z\n"
      << "element face " << mesh.face_count() << "\n"
      << "property list uchar int vertex_indices\nend_header\n";
  for (const auto& v : mesh.vertices()) {
    write_le(out, static_cast<float>(v.x()));
    write_le(out, static_cast<float>(v.y()));
    write_le(out, static_cast<float>(v.z()));
  }
  for (const auto& f : mesh.faces()) {
    write_le<std::uint8_t>(out, 3);
    for (auto idx : f) write_le<std::int32_t>(out, idx);
  }
}

TriMesh read_mesh(const std::filesystem::path& path) {
  auto in = open_input(path);
  const auto ext = lower_extension(path);
  if (ext == ".obj") return read_obj(in, path.string());
  if (ext == ".ply") return read_ply(in, path.string());
  throw InvalidInput(path.string() + ": unknown mesh extension (expected .obj or .ply)");
}

void write_mesh(const std::filesystem::path& path, const TriMesh& mesh) {
  const auto ext = lower_extension(path);
  if (ext != ".obj" && ext != ".ply") {
    throw InvalidInput(path.string() + ": unknown mesh extension (expected .obj or .ply)");
  }
  auto out = open_output(path);
  if (ext == ".obj") write_obj(out, mesh);
  else write_ply(out, mesh);
}

namespace {
constexpr char kGridMagic[8] = {'D', 'F', 'G', 'R', 'I', 'D', '0', '1'};
constexpr std::size_t kGridHeaderBytes = 64;
}  // namespace

ScalarGrid read_grid(std::istream& in, const std::string& source) {
  char magic[8];
  if (!in.read(magic, 8) || !std::equal(magic, magic + 8, kGridMagic)) {
    throw InvalidInput(source + ": missing DFGRID01 magic");
  }
  ScalarGrid grid;
  for (auto& r : grid.resolution) r = read_le<std::uint32_t>(in, source);
  for (int a = 0; a < 3; ++a) grid.origin[a] = read_le<double>(in, source);
  grid.voxel_size = read_le<double>(in, source);
  char pad[kGridHeaderBytes - 52];
  if (!in.read(pad, sizeof(pad))) throw InvalidInput(source + ": truncated grid header");
  for (auto r : grid.resolution) {
    if (r < 2) throw InvalidInput(source + ": grid resolution must be at least 2");
  }
  const std::size_t count = static_cast<std::size_t>(grid.resolution[0]) * grid.resolution[1] *
                            grid.resolution[2];
  grid.values.resize(count);
  for (auto& v : grid.values) v = read_le<float>(in, source);
  grid.validate();
  return grid;
}

void write_grid(std::ostream& out, const ScalarGrid& grid) {
  grid.validate();
  out.write(kGridMagic, 8);
  for (auto r : grid.resolution) write_le<std::uint32_t>(out, r);
  for (int a = 0; a < 3; ++a) write_le<double>(out, grid.origin[a]);
  write_le<double>(out, grid.voxel_size);
  const char pad[kGridHeaderBytes - 52] = {};
  out.write(pad, sizeof(pad));
  for (double v : grid.values) write_le<float>(out, static_cast<float>(v));
}

ScalarGrid read_grid(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_grid(in, path.string());
}

void write_grid(const std::filesystem::path& path, const ScalarGrid& grid) {
  auto out = open_output(path);
  write_grid(out, grid);
}

}  // namespace dflow

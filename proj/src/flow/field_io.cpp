#include "dflow/flow/field_io.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

#include "dflow/binary_io.hpp"
#include "dflow/errors.hpp"

namespace dflow {

using detail::read_le;
using detail::write_le;

void write_field(std::ostream& out, const TransformField& field) {
  const nlohmann::json header = {{"format", "dfield"},
                                 {"version", 1},
                                 {"anchors", field.size()},
                                 {"k", field.k()},
                                 {"tau", field.surface_gate()}};
  out << header.dump() << '\n';
  for (const auto& a : field.anchors()) {
    for (int c = 0; c < 3; ++c) write_le(out, a[c]);
  }
  for (const auto& r : field.rotations()) {
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) write_le(out, r(row, col));
    }
  }
  for (const auto& t : field.translations()) {
    for (int c = 0; c < 3; ++c) write_le(out, t[c]);
  }
}

TransformField read_field(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput(source + ": empty field file");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(source + ": bad field header: " + e.what());
  }
  if (header.value("format", "") != "dfield") throw InvalidInput(source + ": not a dfield file");
  std::size_t n = 0, k = 0;
  double tau = 0.0;
  try {
    n = header.at("anchors").get<std::size_t>();
    k = header.at("k").get<std::size_t>();
    tau = header.at("tau").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(source + ": bad field header: " + e.what());
  }
  std::vector<Point3> anchors(n);
  std::vector<Mat3> rotations(n);
  std::vector<Vec3> translations(n);
  for (auto& a : anchors) {
    for (int c = 0; c < 3; ++c) a[c] = read_le<double>(in, source);
  }
  for (auto& r : rotations) {
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) r(row, col) = read_le<double>(in, source);
    }
  }
  for (auto& t : translations) {
    for (int c = 0; c < 3; ++c) t[c] = read_le<double>(in, source);
  }
  try {
    return TransformField(std::move(anchors), std::move(rotations), std::move(translations), k, tau);
  } catch (const InvalidInput& e) {
    throw InvalidInput(source + ": " + e.what());
  }
}

void write_field(const std::filesystem::path& path, const TransformField& field) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  write_field(out, field);
}

TransformField read_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  return read_field(in, path.string());
}

}  // namespace dflow

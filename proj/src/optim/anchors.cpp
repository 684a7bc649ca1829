#include "dflow/optim/anchors.hpp"

#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>

#include "dflow/errors.hpp"

namespace dflow {

AnchorSet::AnchorSet(std::vector<Anchor> anchors, const std::vector<Point3>& mesh_vertices)
    : anchors_(std::move(anchors)) {
  for (std::size_t i = 0; i < anchors_.size(); ++i) {
    const Anchor& a = anchors_[i];
    if (a.vertex >= mesh_vertices.size()) {
      throw InvalidInput("anchor " + std::to_string(i) + " references vertex " +
                         std::to_string(a.vertex) + " beyond the mesh");
    }
    if (!a.source.allFinite() || !a.target.allFinite()) {
      throw InvalidInput("anchor " + std::to_string(i) + " has non-finite coordinates");
    }
    if ((a.source - mesh_vertices[a.vertex]).norm() > kAnchorVertexTolerance) {
      throw InvalidInput("anchor " + std::to_string(i) + " source does not match vertex " +
                         std::to_string(a.vertex));
    }
  }
}

void write_anchors(const std::filesystem::path& path, const std::vector<Anchor>& anchors) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  for (const auto& a : anchors) {
    const nlohmann::json line = {{"vid", a.vertex},
                                 {"va", {a.source.x(), a.source.y(), a.source.z()}},
                                 {"vb", {a.target.x(), a.target.y(), a.target.z()}}};
    out << line.dump() << '\n';
  }
}

std::vector<Anchor> read_anchors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::vector<Anchor> anchors;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto& va = j.at("va");
      const auto& vb = j.at("vb");
      if (va.size() != 3 || vb.size() != 3) throw InvalidInput("va/vb must have 3 components");
      anchors.push_back({j.at("vid").get<std::uint32_t>(),
                         Point3(va[0].get<double>(), va[1].get<double>(), va[2].get<double>()),
                         Point3(vb[0].get<double>(), vb[1].get<double>(), vb[2].get<double>())});
    } catch (const std::exception& e) {
      throw InvalidInput(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return anchors;
}

}  // namespace dflow

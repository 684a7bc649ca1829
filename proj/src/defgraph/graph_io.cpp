#include "dflow/defgraph/graph_io.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

#include "dflow/errors.hpp"

namespace dflow {
namespace {

nlohmann::json vec_json(const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }

Vec3 json_vec(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw InvalidInput("expected a 3-element array");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace

nlohmann::json graph_to_json(const DeformationGraph& graph) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : graph.nodes()) nodes.push_back(vec_json(n));
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [a, b] : graph.edges()) edges.push_back({a, b});
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : graph.params) {
    params.push_back({{"rotation", vec_json(p.rotation)}, {"translation", vec_json(p.translation)}});
  }
  return {{"nodes", nodes}, {"edges", edges}, {"params", params}};
}

DeformationGraph graph_from_json(const nlohmann::json& j) {
  try {
    std::vector<Point3> nodes;
    for (const auto& n : j.at("nodes")) nodes.push_back(json_vec(n));
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    DeformationGraph graph(std::move(nodes), std::move(edges));
    const auto& params = j.at("params");
    if (params.size() != graph.size()) throw InvalidInput("params count differs from node count");
    for (std::size_t i = 0; i < graph.size(); ++i) {
      graph.params[i].rotation = json_vec(params[i].at("rotation"));
      graph.params[i].translation = json_vec(params[i].at("translation"));
    }
    return graph;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed graph: ") + e.what());
  }
}

void write_graph(const std::filesystem::path& path, const DeformationGraph& graph) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << graph_to_json(graph).dump() << '\n';
}

DeformationGraph read_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  try {
    return graph_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
}

}  // namespace dflow

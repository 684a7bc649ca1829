#pragma once

#include <filesystem>
#include <nlohmann/json_fwd.hpp>

#include "dflow/defgraph/graph.hpp"

namespace dflow {

/// `.dgraph` JSON: {"nodes": [[x,y,z],...], "edges": [[i,j],...],
///                  "params": [{"rotation": [..], "translation": [..]}, ...]}
nlohmann::json graph_to_json(const DeformationGraph& graph);
DeformationGraph graph_from_json(const nlohmann::json& j);

void write_graph(const std::filesystem::path& path, const DeformationGraph& graph);
DeformationGraph read_graph(const std::filesystem::path& path);

}  // namespace dflow

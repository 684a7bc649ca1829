#include "dflow/defgraph/graph.hpp"

#include <Eigen/Geometry>

#include "dflow/defgraph/rotation.hpp"
#include "dflow/errors.hpp"
#include "dflow/flow/flow.hpp"
#include "dflow/parallel.hpp"

namespace dflow {

DeformationGraph::DeformationGraph(std::vector<Point3> nodes, std::vector<Edge> edges)
    : params(nodes.size()), nodes_(std::move(nodes)), edges_(std::move(edges)), index_(nodes_) {
  const auto n = static_cast<std::int32_t>(nodes_.size());
  for (const auto& [a, b] : edges_) {
    if (a < 0 || b < 0 || a >= n || b >= n || a == b) {
      throw InvalidInput("graph edge (" + std::to_string(a) + ", " + std::to_string(b) +
                         ") is invalid");
    }
  }
}

std::vector<Mat3> DeformationGraph::rotations() const {
  std::vector<Mat3> out(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) out[i] = rotation_from_axis_angle(params[i].rotation);
  return out;
}

DeformationGraph build_graph(const TriMesh& decimated) {
  return DeformationGraph(decimated.vertices(), decimated.unique_edges());
}

InterpolationWeights compute_interpolation(const DeformationGraph& graph,
                                           std::span<const Point3> vertices, std::size_t k) {
  if (k < 1 || k > graph.size()) {
    throw InvalidInput("interpolation needs 1 <= k <= node count (k = " + std::to_string(k) +
                       ", nodes = " + std::to_string(graph.size()) + ")");
  }
  InterpolationWeights out;
  out.k = k;
  out.nodes.resize(vertices.size() * k);
  out.weights.resize(vertices.size() * k);
  parallel_for(vertices.size(), [&](std::size_t v) {
    thread_local std::vector<Neighbor> neighbors;
    thread_local std::vector<double> distances;
    graph.node_index().query(vertices[v], k, neighbors);
    distances.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
      out.nodes[v * k + j] = neighbors[j].index;
      distances[j] = neighbors[j].distance;
    }
    blend_weights(distances, std::span<double>(out.weights.data() + v * k, k));
  });
  return out;
}

Mat3 blend_rotations(std::span<const std::uint32_t> nodes, std::span<const double> weights,
                     const std::vector<Mat3>& node_rotations,
                     const std::vector<NodeParams>& params, RotationBlend mode) {
  std::size_t heaviest = 0;
  for (std::size_t j = 1; j < nodes.size(); ++j) {
    if (weights[j] > weights[heaviest]) heaviest = j;
  }
  const auto ref = nodes[heaviest];
  bool shared = true;
  for (std::size_t j = 0; j < nodes.size() && shared; ++j) {
    if (weights[j] > 0.0 && params[nodes[j]].rotation != params[ref].rotation) shared = false;
  }
  if (shared) return node_rotations[ref];

  if (mode == RotationBlend::LinearPolar) {
    Mat3 sum = Mat3::Zero();
    for (std::size_t j = 0; j < nodes.size(); ++j) sum += weights[j] * node_rotations[nodes[j]];
    return project_to_rotation(sum);
  }
  const Eigen::Quaterniond q_ref(node_rotations[ref]);
  Eigen::Vector4d sum = Eigen::Vector4d::Zero();
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    if (weights[j] == 0.0) continue;
    Eigen::Quaterniond q(node_rotations[nodes[j]]);
    if (q.coeffs().dot(q_ref.coeffs()) < 0.0) q.coeffs() *= -1.0;
    sum += weights[j] * q.coeffs();
  }
  Eigen::Quaterniond blended;
  blended.coeffs() = sum.normalized();
  return blended.toRotationMatrix();
}

TransformField field_from_graph(const DeformationGraph& graph, std::vector<Point3> vertices,
                                const InterpolationWeights& weights, const FieldOptions& options) {
  if (weights.vertex_count() != vertices.size()) {
    throw InvalidInput("interpolation weights do not match the vertex list");
  }
  const auto node_rotations = graph.rotations();
  const auto& nodes = graph.nodes();
  const auto& params = graph.params;
  std::vector<Mat3> rotations(vertices.size());
  std::vector<Vec3> translations(vertices.size());
  parallel_for(vertices.size(), [&](std::size_t v) {
    const auto ids = weights.nodes_of(v);
    const auto w = weights.weights_of(v);
    rotations[v] = blend_rotations(ids, w, node_rotations, params, options.rotation);
    Vec3 t = Vec3::Zero();
    for (std::size_t j = 0; j < ids.size(); ++j) {
      if (w[j] == 0.0) continue;
      const auto n = ids[j];
      if (options.translation == TranslationBlend::Linear) {
        t += w[j] * params[n].translation;
      } else {
        t += w[j] * ((node_rotations[n] - Mat3::Identity()) * (vertices[v] - nodes[n]) +
                     params[n].translation);
      }
    }
    translations[v] = t;
  });
  return TransformField(std::move(vertices), std::move(rotations), std::move(translations),
                        options.k, options.surface_gate);
}

}  // namespace dflow

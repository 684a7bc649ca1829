#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dflow/flow/transform_field.hpp"
#include "dflow/geometry/knn.hpp"
#include "dflow/geometry/mesh.hpp"

namespace dflow {

inline constexpr std::size_t kDefaultGraphNodes = 2000;

/// Learnable per-node parameters.
struct NodeParams {
  Vec3 rotation = Vec3::Zero();  ///< axis-angle, radians, magnitude in [0, pi]
  Vec3 translation = Vec3::Zero();
};

/// Embedded deformation graph on the vertices of a decimated mesh.
///
/// Nodes and edges are fixed at construction; only `params` change, and only
/// through the optimizer between evaluation passes.
class DeformationGraph {
 public:
  DeformationGraph(std::vector<Point3> nodes, std::vector<Edge> edges);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<Point3>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const KnnIndex& node_index() const { return index_; }

  std::vector<NodeParams> params;

  /// Rotation matrices of every node from the current params.
  std::vector<Mat3> rotations() const;

 private:
  std::vector<Point3> nodes_;
  std::vector<Edge> edges_;
  KnnIndex index_;
};

/// Nodes are the decimated vertices, edges the unique mesh edges, params zero.
DeformationGraph build_graph(const TriMesh& decimated);

/// Sparse per-vertex blend of graph nodes: `k` node ids and weights per
/// vertex, stored contiguously.
struct InterpolationWeights {
  std::size_t k = 0;
  std::vector<std::uint32_t> nodes;
  std::vector<double> weights;

  std::size_t vertex_count() const { return k == 0 ? 0 : nodes.size() / k; }
  std::span<const std::uint32_t> nodes_of(std::size_t v) const { return {nodes.data() + v * k, k}; }
  std::span<const double> weights_of(std::size_t v) const { return {weights.data() + v * k, k}; }
};

/// K nearest nodes per vertex with the same blend weights as the flow.
/// Requires 1 <= k <= node count.
InterpolationWeights compute_interpolation(const DeformationGraph& graph,
                                           std::span<const Point3> vertices, std::size_t k);

enum class RotationBlend {
  Quaternion,    ///< normalized weighted quaternion sum, signs aligned to the heaviest node
  LinearPolar,   ///< weighted matrix sum projected back onto SO(3)
};

enum class TranslationBlend {
  /// t(v) = sum_j w_j t_j. Matches the translation-only consistency loss.
  Linear,
  /// t(v) = sum_j w_j (R_j (v - g_j) + g_j + t_j) - v, the classic embedded
  /// deformation of v; used with the rotation-aware consistency loss.
  Embedded,
};

struct FieldOptions {
  RotationBlend rotation = RotationBlend::Quaternion;
  TranslationBlend translation = TranslationBlend::Linear;
  std::size_t k = kDefaultNeighbors;
  double surface_gate = kDefaultSurfaceGate;
};

/// Blended rotation of the given nodes. When every positively weighted node
/// shares the same rotation parameters, that node's matrix is returned as is.
Mat3 blend_rotations(std::span<const std::uint32_t> nodes, std::span<const double> weights,
                     const std::vector<Mat3>& node_rotations,
                     const std::vector<NodeParams>& params, RotationBlend mode);

/// Per-vertex anchored transforms interpolated from the graph.
TransformField field_from_graph(const DeformationGraph& graph, std::vector<Point3> vertices,
                                const InterpolationWeights& weights,
                                const FieldOptions& options = {});

}  // namespace dflow

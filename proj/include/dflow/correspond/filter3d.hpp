#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dflow/correspond/lift.hpp"
#include "dflow/geometry/knn.hpp"
#include "dflow/geometry/mesh.hpp"
#include "dflow/optim/anchors.hpp"

namespace dflow {

/// Greedy leader clustering in index order: each point joins the earliest
/// cluster whose leader lies within `radius`, otherwise it leads a new one.
std::vector<std::vector<std::uint32_t>> cluster_points(std::span<const Point3> points, double radius);

struct Filter3dParams {
  double radius = 0.0;  ///< epsilon_A, cluster radius in original space
  double kappa = 3.0;   ///< deviation factor on the MAD
  std::size_t min_cluster = 3;
  /// Throws InvalidParams unless radius > 0, kappa > 0, min_cluster >= 2.
  void validate() const;
};

inline constexpr double kDefaultClusterRadiusFraction = 0.02;

struct Filter3dResult {
  std::vector<std::uint32_t> kept;  ///< indices into the input, ascending
  std::size_t clusters = 0;
  std::size_t small_cluster_drops = 0;  ///< pairs dropped with undersized clusters
  std::size_t deviation_drops = 0;      ///< pairs dropped for diverging from their cluster
};

/// Clusters p^A, then inside every cluster of at least `min_cluster` pairs
/// keeps pair i iff |d_i - median(d)| <= max(radius, kappa * MAD), with
/// d = p^B - p^A and a per-component median.
Filter3dResult filter_3d_indices(std::span<const CorrespondencePair> pairs, const Filter3dParams& params);
std::vector<CorrespondencePair> filter_3d(std::span<const CorrespondencePair> pairs,
                                          const Filter3dParams& params);

struct SnapResult {
  std::vector<Anchor> anchors;  ///< sorted by vertex index
  std::size_t duplicates = 0;
};

/// Moves every p^A onto its nearest mesh vertex. Where several pairs land on
/// one vertex, the smallest snap distance wins (earlier pair on ties).
SnapResult snap_to_anchors(std::span<const CorrespondencePair> pairs, const TriMesh& mesh,
                           const KnnIndex& vertex_index);

}  // namespace dflow

#pragma once

#include <cstddef>

#include "dflow/geometry/mesh.hpp"

namespace dflow {

/// Reduces `mesh` to `target_vertices` vertices by iterative edge collapse.
///
/// Candidates are ranked by quadric error plus squared edge length, so flat
/// and developable regions (cylinder sides, planar caps) still thin out
/// evenly instead of collapsing into slivers. A collapse is skipped when it
/// would break the link condition, flip or degenerate an incident face, or
/// shrink its connected component below a tetrahedron. Collapses never join
/// components.
///
/// Returns the input unchanged when it already has `target_vertices`
/// vertices; throws TargetTooLarge when it has fewer.
TriMesh decimate(const TriMesh& mesh, std::size_t target_vertices);

}  // namespace dflow

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dflow/correspond/lift.hpp"
#include "dflow/flow/transform_field.hpp"
#include "dflow/geometry/mesh.hpp"

namespace dflow {

enum class SyntheticKind { Bend, Twist, Articulate };

SyntheticKind synthetic_kind_from_string(const std::string& name);
std::string to_string(SyntheticKind kind);

struct SynthParams {
  /// Bend: total bend angle (degrees, 0..90). Twist: degrees per unit length
  /// along the axis (0..180). Articulate: hinge angle (degrees, 0..90).
  double angle_deg = 45.0;
  std::size_t pairs = 500;
  double contamination = 0.0;  ///< outlier fraction in [0, 1)
  std::size_t k = kDefaultNeighbors;
  double surface_gate = kDefaultSurfaceGate;
  void validate(SyntheticKind kind) const;
};

/// A correspondence whose p^A is mesh vertex `vertex`.
struct LabeledPair {
  std::uint32_t vertex;
  CorrespondencePair pair;
  bool outlier = false;
};

struct SyntheticScene {
  SyntheticKind kind;
  TriMesh rest;
  TransformField truth;
  TriMesh transformed;  ///< warp_mesh(truth, rest)
  std::vector<LabeledPair> clean;
  std::vector<LabeledPair> contaminated;
  std::size_t outliers = 0;
};

/// Capped cylinder of radius 0.12 and length 0.8 along z, centered at
/// x = y = 0.5 from z = 0.1 to 0.9, with 9902 vertices.
TriMesh make_cylinder();

/// Two tessellated boxes stacked along z with a small gap.
TriMesh make_hinged_boxes();

/// Builds the scene. Clean pairs use distinct random vertices with
/// p^B = forward_flow(truth, p^A); the contaminated copy replaces exactly
/// round(contamination * pairs) targets with points drawn uniformly from the
/// transformed mesh's bounding box. Throws InvalidParams.
SyntheticScene make_synthetic(SyntheticKind kind, const SynthParams& params, std::uint64_t seed);

}  // namespace dflow

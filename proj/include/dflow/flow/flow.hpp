#pragma once

#include <span>
#include <vector>

#include "dflow/flow/transform_field.hpp"
#include "dflow/geometry/mesh.hpp"

namespace dflow {

/// Normalized blend weights for neighbours sorted by ascending distance.
/// Raw weight 1 - d_i / d_max, so the farthest neighbour gets exactly zero.
/// A single neighbour gets weight 1; when every raw weight is below 1e-12
/// (all distances equal) the weights are uniform.
std::vector<double> blend_weights(std::span<const double> distances);
void blend_weights(std::span<const double> distances, std::span<double> out);

/// Forward flow: blend of the K nearest anchors' transforms applied to p.
Point3 forward_flow(const TransformField& field, const Point3& p);
/// Backward flow: blend of the inverse transforms of the K nearest
/// transformed anchors, weighted by distance in transformed space.
Point3 backward_flow(const TransformField& field, const Point3& p);

enum class Side { Original, Transformed };
enum class Direction { Forward, Backward };

/// True iff the nearest anchor (Original) or transformed anchor (Transformed)
/// is strictly closer than the field's surface gate.
bool is_near_surface(const TransformField& field, const Point3& p, Side side);

/// Maps every vertex through the forward flow and reuses the faces.
TriMesh warp_mesh(const TransformField& field, const TriMesh& mesh);

std::vector<Point3> warp_points(const TransformField& field, std::span<const Point3> points,
                                Direction direction);

struct WarpedSample {
  Point3 point;
  Vec3 direction;
  /// False when the sample lies outside the surface gate; callers treat the
  /// sample as empty space.
  bool near_surface;
  /// Set when the direction was copied from a neighbouring sample because the
  /// transformed samples around this one coincide.
  bool direction_copied;
};

/// Maps ray samples (transformed space) back to original space and derives
/// per-sample view directions from the mapped positions: central differences
/// inside the ray, one-sided at the ends. Throws InvalidInput for fewer than
/// two samples or repeated consecutive samples, and DegenerateDirection when
/// no sample has a usable direction.
///
/// With `surface`, the gate uses point-to-triangle distance to that surface
/// (in the samples' space) instead of the nearest anchor. Forward rays are
/// mapped from original to transformed space with the mirrored rules.
std::vector<WarpedSample> warp_ray_samples(const TransformField& field,
                                           std::span<const Point3> samples,
                                           const TriangleSurface* surface = nullptr,
                                           Direction direction = Direction::Backward);

/// The transformed anchors v + t joined by `faces`, for triangle gating.
TriangleSurface transformed_surface(const TransformField& field, std::vector<Face> faces);

}  // namespace dflow

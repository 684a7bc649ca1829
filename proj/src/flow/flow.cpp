#include "dflow/flow/flow.hpp"

#include <algorithm>
#include <cmath>

#include "dflow/errors.hpp"
#include "dflow/parallel.hpp"

namespace dflow {
namespace {

constexpr double kDegenerateWeight = 1e-12;
constexpr double kDegenerateStep = 1e-12;

// The flows are evaluated as p + sum_k w_k * displacement_k(p). Algebraically
// identical to sum_k w_k * xi_k(p) because the weights sum to one, and an
// identity transform contributes an exact zero, so identity fields reproduce
// their input bit for bit.
template <class Displacement>
Point3 blend(const KnnIndex& index, std::size_t k, const Point3& p, Displacement&& displacement) {
  thread_local std::vector<Neighbor> neighbors;
  thread_local std::vector<double> distances;
  thread_local std::vector<double> weights;
  index.query(p, k, neighbors);
  distances.resize(neighbors.size());
  weights.resize(neighbors.size());
  for (std::size_t i = 0; i < neighbors.size(); ++i) distances[i] = neighbors[i].distance;
  blend_weights(distances, weights);

  Vec3 offset = Vec3::Zero();
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    if (weights[i] == 0.0) continue;
    offset += weights[i] * displacement(neighbors[i].index);
  }
  return p + offset;
}

}  // namespace

void blend_weights(std::span<const double> distances, std::span<double> out) {
  const std::size_t n = distances.size();
  if (n == 0) return;
  if (n == 1) {
    out[0] = 1.0;
    return;
  }
  const double d_max = *std::max_element(distances.begin(), distances.end());
  double sum = 0.0;
  bool degenerate = true;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = d_max > 0.0 ? 1.0 - distances[i] / d_max : 0.0;
    if (out[i] >= kDegenerateWeight) degenerate = false;
    sum += out[i];
  }
  if (degenerate) {
    std::fill(out.begin(), out.begin() + n, 1.0 / static_cast<double>(n));
    return;
  }
  for (std::size_t i = 0; i < n; ++i) out[i] /= sum;
}

std::vector<double> blend_weights(std::span<const double> distances) {
  std::vector<double> out(distances.size());
  blend_weights(distances, out);
  return out;
}

Point3 forward_flow(const TransformField& field, const Point3& p) {
  const auto& anchors = field.anchors();
  const auto& rotations = field.rotations();
  const auto& translations = field.translations();
  return blend(field.forward_index(), field.k(), p, [&](std::uint32_t i) -> Vec3 {
    return (rotations[i] - Mat3::Identity()) * (p - anchors[i]) + translations[i];
  });
}

Point3 backward_flow(const TransformField& field, const Point3& p) {
  const auto& anchors = field.anchors();
  const auto& rotations = field.rotations();
  const auto& translations = field.translations();
  return blend(field.backward_index(), field.k(), p, [&](std::uint32_t i) -> Vec3 {
    const Mat3 rt = rotations[i].transpose();
    return (rt - Mat3::Identity()) * (p - anchors[i]) - rt * translations[i];
  });
}

bool is_near_surface(const TransformField& field, const Point3& p, Side side) {
  const auto& index = side == Side::Original ? field.forward_index() : field.backward_index();
  return surface_distance(index, p) < field.surface_gate();
}

TriMesh warp_mesh(const TransformField& field, const TriMesh& mesh) {
  const auto& src = mesh.vertices();
  std::vector<Point3> warped(src.size());
  parallel_for(src.size(), [&](std::size_t i) { warped[i] = forward_flow(field, src[i]); });
  return TriMesh(std::move(warped), mesh.faces());
}

std::vector<Point3> warp_points(const TransformField& field, std::span<const Point3> points,
                                Direction direction) {
  std::vector<Point3> out(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    out[i] = direction == Direction::Forward ? forward_flow(field, points[i])
                                             : backward_flow(field, points[i]);
  });
  return out;
}

TriangleSurface transformed_surface(const TransformField& field, std::vector<Face> faces) {
  return TriangleSurface(TriMesh(field.backward_index().points(), std::move(faces)));
}

std::vector<WarpedSample> warp_ray_samples(const TransformField& field,
                                           std::span<const Point3> samples,
                                           const TriangleSurface* surface, Direction direction) {
  const std::size_t n = samples.size();
  if (n < 2) throw InvalidInput("a ray needs at least two samples");
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (samples[i] == samples[i + 1]) {
      throw InvalidInput("ray samples " + std::to_string(i) + " and " + std::to_string(i + 1) +
                         " coincide");
    }
  }

  std::vector<WarpedSample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool back = direction == Direction::Backward;
    out[i].point = back ? backward_flow(field, samples[i]) : forward_flow(field, samples[i]);
    out[i].near_surface = surface ? surface->within(samples[i], field.surface_gate())
                                  : is_near_surface(field, samples[i], back ? Side::Transformed : Side::Original);
    out[i].direction_copied = false;
  }

  std::vector<char> valid(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = i + 1 == n ? n - 1 : i + 1;
    const Vec3 step = out[hi].point - out[lo].point;
    const double len = step.norm();
    if (len > kDegenerateStep && std::isfinite(len)) {
      out[i].direction = step / len;
      valid[i] = 1;
    }
  }
  if (std::find(valid.begin(), valid.end(), 1) == valid.end()) {
    throw DegenerateDirection("every transformed ray sample coincides with its neighbours");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (valid[i]) continue;
    for (std::size_t offset = 1; offset < n; ++offset) {
      if (i >= offset && valid[i - offset]) {
        out[i].direction = out[i - offset].direction;
        break;
      }
      if (i + offset < n && valid[i + offset]) {
        out[i].direction = out[i + offset].direction;
        break;
      }
    }
    out[i].direction_copied = true;
  }
  return out;
}

}  // namespace dflow

#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "dflow/geometry/rigid.hpp"

namespace dflow {

using Face = std::array<std::int32_t, 3>;
using Edge = std::pair<std::int32_t, std::int32_t>;

struct BoundingBox {
  Point3 min = Point3::Constant(std::numeric_limits<double>::infinity());
  Point3 max = Point3::Constant(-std::numeric_limits<double>::infinity());

  void extend(const Point3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  void extend(const BoundingBox& b) {
    min = min.cwiseMin(b.min);
    max = max.cwiseMax(b.max);
  }
  bool empty() const { return !(min.array() <= max.array()).all(); }
  double diagonal() const { return empty() ? 0.0 : (max - min).norm(); }
};

BoundingBox bounding_box(const std::vector<Point3>& points);

/// Indexed triangle mesh. Construction validates that every index is in range,
/// no face repeats a vertex, and every coordinate is finite.
class TriMesh {
 public:
  TriMesh() = default;
  TriMesh(std::vector<Point3> vertices, std::vector<Face> faces);

  const std::vector<Point3>& vertices() const { return vertices_; }
  const std::vector<Face>& faces() const { return faces_; }
  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t face_count() const { return faces_.size(); }
  bool empty() const { return vertices_.empty(); }

  /// Unique undirected edges (i < j), sorted.
  std::vector<Edge> unique_edges() const;
  double average_edge_length() const;
  BoundingBox bounds() const { return bounding_box(vertices_); }
  /// Connected-component label per vertex (isolated vertices get their own).
  std::vector<std::int32_t> component_labels(std::size_t* count = nullptr) const;
  /// Sum of signed tetra volumes; positive for closed outward-oriented meshes.
  double signed_volume() const;

 private:
  std::vector<Point3> vertices_;
  std::vector<Face> faces_;
};

}  // namespace dflow

#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "dflow/geometry/rigid.hpp"

namespace dflow {

struct Neighbor {
  std::uint32_t index;
  double distance;
};

/// Exact k-nearest-neighbour index over a fixed point set.
///
/// Results are ordered by (distance, index), so ties resolve to the smaller
/// point index and every query is deterministic. Small sets (< 64 points) are
/// scanned linearly; larger ones use a kd-tree whose pruning never discards a
/// node that could hold an equal-distance point. The index is immutable and
/// safe to query from several threads at once.
class KnnIndex {
 public:
  /// Throws EmptyPointSet for an empty list.
  explicit KnnIndex(std::vector<Point3> points);

  std::size_t size() const { return points_.size(); }
  const std::vector<Point3>& points() const { return points_; }

  /// min(k, size()) neighbours in ascending (distance, index) order.
  std::vector<Neighbor> query(const Point3& p, std::size_t k) const;
  /// Same as query() but reuses `out` to avoid allocation in hot loops.
  void query(const Point3& p, std::size_t k, std::vector<Neighbor>& out) const;
  Neighbor nearest(const Point3& p) const;
  /// Every point with distance <= radius, ascending (distance, index).
  std::vector<Neighbor> radius_query(const Point3& p, double radius) const;

 private:
  struct Node {
    Point3 lo;
    Point3 hi;
    std::uint32_t begin;
    std::uint32_t end;
    std::int32_t left = -1;
    std::int32_t right = -1;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);

  static constexpr std::size_t kBruteForceBelow = 64;
  static constexpr std::uint32_t kLeafSize = 12;

  std::vector<Point3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

/// Distance from p to the nearest indexed vertex.
double surface_distance(const KnnIndex& vertex_index, const Point3& p);

class TriMesh;

/// Exact point-to-triangle surface distance. Uses the vertex index to bound
/// the candidate set: the closest surface point lies in a triangle with a
/// vertex within (nearest-vertex distance + longest edge) of p.
double surface_distance_to_triangles(const TriMesh& mesh, const KnnIndex& vertex_index,
                                     const Point3& p);

/// Point-to-triangle distance queries against a fixed mesh, for repeated
/// gating tests.
class TriangleSurface {
 public:
  /// Throws EmptyPointSet for a mesh without vertices.
  explicit TriangleSurface(TriMesh mesh);

  const TriMesh& mesh() const;
  double distance(const Point3& p) const;
  /// distance(p) < tau, without scanning faces when a vertex already decides.
  bool within(const Point3& p, double tau) const;

 private:
  std::shared_ptr<const TriMesh> mesh_;
  KnnIndex index_;
  std::vector<std::vector<std::uint32_t>> vertex_faces_;
  double longest_edge_ = 0.0;

  double distance_below(const Point3& p, double bound) const;
};

/// Closest point on triangle (a, b, c) to p.
Point3 closest_point_on_triangle(const Point3& p, const Point3& a, const Point3& b,
                                 const Point3& c);

}  // namespace dflow

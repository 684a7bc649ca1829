#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Geometry>

#include "dflow/geometry/marching_cubes.hpp"
#include "dflow/geometry/mesh.hpp"
#include "dflow/geometry/rigid.hpp"

namespace testing {

using dflow::Mat3;
using dflow::Point3;
using dflow::Vec3;

inline Point3 random_point(std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  return Point3(u(rng), u(rng), u(rng));
}

inline std::vector<Point3> random_points(std::mt19937_64& rng, std::size_t n, double lo = -1.0,
                                         double hi = 1.0) {
  std::vector<Point3> out(n);
  for (auto& p : out) p = random_point(rng, lo, hi);
  return out;
}

// Rotation built from a random unit quaternion, independent of the library's
// exponential map.
inline Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline Mat3 rot_z(double angle) {
  return Eigen::AngleAxisd(angle, Vec3::UnitZ()).toRotationMatrix();
}

inline dflow::ScalarGrid sphere_grid(std::uint32_t n, double radius, const Point3& center = {0.5, 0.5, 0.5}) {
  dflow::ScalarGrid g;
  g.resolution = {n, n, n};
  g.voxel_size = 1.0 / (n - 1);
  g.origin = Point3::Zero();
  g.values.resize(static_cast<std::size_t>(n) * n * n);
  for (std::uint32_t k = 0; k < n; ++k)
    for (std::uint32_t j = 0; j < n; ++j)
      for (std::uint32_t i = 0; i < n; ++i)
        g.values[g.linear_index(i, j, k)] = radius - (g.position(i, j, k) - center).norm();
  return g;
}

inline dflow::TriMesh sphere_mesh(std::uint32_t n, double radius, const Point3& center = {0.5, 0.5, 0.5}) {
  return dflow::marching_cubes(sphere_grid(n, radius, center), 0.0);
}

// Axis-aligned box as 8 vertices and 12 outward-wound triangles.
inline dflow::TriMesh box_mesh(const Point3& lo, const Point3& hi) {
  std::vector<Point3> v;
  for (int i = 0; i < 8; ++i) {
    v.emplace_back((i & 1) ? hi.x() : lo.x(), (i & 2) ? hi.y() : lo.y(), (i & 4) ? hi.z() : lo.z());
  }
  std::vector<dflow::Face> f = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
                                {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
  return dflow::TriMesh(std::move(v), std::move(f));
}

}  // namespace testing

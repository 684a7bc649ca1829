#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dflow/geometry/mesh.hpp"

namespace dflow {

/// Regular scalar grid with samples at origin + (i, j, k) * voxel_size,
/// stored x-fastest.
struct ScalarGrid {
  std::array<std::uint32_t, 3> resolution{2, 2, 2};
  Point3 origin = Point3::Zero();
  double voxel_size = 1.0;
  std::vector<double> values;

  /// Throws InvalidInput if resolution < 2 on any axis, voxel size <= 0, or
  /// the value count does not match.
  void validate() const;

  std::size_t linear_index(std::uint32_t i, std::uint32_t j, std::uint32_t k) const {
    return i + static_cast<std::size_t>(resolution[0]) * (j + static_cast<std::size_t>(resolution[1]) * k);
  }
  double at(std::uint32_t i, std::uint32_t j, std::uint32_t k) const { return values[linear_index(i, j, k)]; }
  Point3 position(std::uint32_t i, std::uint32_t j, std::uint32_t k) const {
    return origin + voxel_size * Point3(i, j, k);
  }
};

struct MarchingCubesOptions {
  /// Samples above the iso level are inside when true (density fields);
  /// set false for signed distance fields.
  bool inside_is_higher = true;
};

/// Extracts the iso surface with the 256-case table. Vertices are shared
/// between cells through their grid edge, so closed level sets yield closed
/// meshes. Faces are wound counter-clockwise seen from outside.
/// Throws EmptyIsosurface when no cell straddles `iso`.
TriMesh marching_cubes(const ScalarGrid& grid, double iso,
                       const MarchingCubesOptions& options = {});

}  // namespace dflow

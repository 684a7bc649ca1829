#include "dflow/geometry/marching_cubes.hpp"

#include <cmath>
#include <string>
#include <unordered_map>

#include "dflow/errors.hpp"

namespace dflow {
namespace {

#include "mc_table.inc"

// Corner c sits at (kCorner[c][0], kCorner[c][1], kCorner[c][2]) in the cell.
constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                               {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
constexpr int kEdgeCorners[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                                     {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};

}  // namespace

void ScalarGrid::validate() const {
  for (auto r : resolution) {
    if (r < 2) throw InvalidInput("grid resolution must be at least 2 on every axis");
  }
  if (!(voxel_size > 0.0) || !std::isfinite(voxel_size)) {
    throw InvalidInput("grid voxel size must be positive");
  }
  const std::size_t expected = static_cast<std::size_t>(resolution[0]) * resolution[1] * resolution[2];
  if (values.size() != expected) {
    throw InvalidInput("grid holds " + std::to_string(values.size()) + " values, expected " +
                       std::to_string(expected));
  }
}

TriMesh marching_cubes(const ScalarGrid& grid, double iso, const MarchingCubesOptions& options) {
  grid.validate();
  const auto [nx, ny, nz] = grid.resolution;

  auto inside = [&](double value) {
    return options.inside_is_higher ? value > iso : value < iso;
  };

  std::vector<Point3> vertices;
  std::vector<Face> faces;
  // Key: 3 * (grid point index of the edge's lower corner) + axis.
  std::unordered_map<std::uint64_t, std::int32_t> edge_vertex;

  auto vertex_on_edge = [&](std::uint32_t i, std::uint32_t j, std::uint32_t k, int edge) {
    const int* a = kCorner[kEdgeCorners[edge][0]];
    const int* b = kCorner[kEdgeCorners[edge][1]];
    std::uint32_t ia[3] = {i + a[0], j + a[1], k + a[2]};
    std::uint32_t ib[3] = {i + b[0], j + b[1], k + b[2]};
    int axis = 0;
    for (int d = 0; d < 3; ++d) {
      if (ia[d] != ib[d]) axis = d;
    }
    const bool a_low = ia[axis] < ib[axis];
    const std::uint32_t* lo = a_low ? ia : ib;
    const std::uint32_t* hi = a_low ? ib : ia;
    const std::uint64_t key = 3 * grid.linear_index(lo[0], lo[1], lo[2]) + axis;
    auto [it, inserted] = edge_vertex.try_emplace(key, 0);
    if (inserted) {
      const double v0 = grid.at(lo[0], lo[1], lo[2]);
      const double v1 = grid.at(hi[0], hi[1], hi[2]);
      const double t = (v1 == v0) ? 0.5 : (iso - v0) / (v1 - v0);
      const Point3 p0 = grid.position(lo[0], lo[1], lo[2]);
      const Point3 p1 = grid.position(hi[0], hi[1], hi[2]);
      it->second = static_cast<std::int32_t>(vertices.size());
      vertices.push_back(p0 + t * (p1 - p0));
    }
    return it->second;
  };

  for (std::uint32_t k = 0; k + 1 < nz; ++k) {
    for (std::uint32_t j = 0; j + 1 < ny; ++j) {
      for (std::uint32_t i = 0; i + 1 < nx; ++i) {
        int config = 0;
        for (int c = 0; c < 8; ++c) {
          if (inside(grid.at(i + kCorner[c][0], j + kCorner[c][1], k + kCorner[c][2]))) {
            config |= 1 << c;
          }
        }
        if (config == 0 || config == 255) continue;
        const std::int8_t* row = kTriangleTable[config];
        for (int t = 0; row[t] >= 0; t += 3) {
          const auto a = vertex_on_edge(i, j, k, row[t]);
          const auto b = vertex_on_edge(i, j, k, row[t + 1]);
          const auto c = vertex_on_edge(i, j, k, row[t + 2]);
          // The table winds counter-clockwise when viewed from the inside
          // corners; swap to face outward.
          faces.push_back({a, c, b});
        }
      }
    }
  }
  if (faces.empty()) throw EmptyIsosurface();
  return TriMesh(std::move(vertices), std::move(faces));
}

}  // namespace dflow

#pragma once

#include <filesystem>
#include <iosfwd>

#include "dflow/geometry/marching_cubes.hpp"
#include "dflow/geometry/mesh.hpp"

namespace dflow {

/// Wavefront OBJ: `v x y z` and `f i j k` (1-based). Polygons are fan
/// triangulated and `i/t/n` index forms are accepted on read.
TriMesh read_obj(std::istream& in, const std::string& source = "<stream>");
void write_obj(std::ostream& out, const TriMesh& mesh);

/// Binary little-endian PLY with float32 positions and int32 face lists.
TriMesh read_ply(std::istream& in, const std::string& source = "<stream>");
void write_ply(std::ostream& out, const TriMesh& mesh);

/// Dispatches on the file extension (.obj or .ply).
TriMesh read_mesh(const std::filesystem::path& path);
void write_mesh(const std::filesystem::path& path, const TriMesh& mesh);

/// Scalar grid file: 64-byte header ("DFGRID01", 3 x uint32 resolution,
/// 3 x float64 origin, float64 voxel size, zero padding) followed by float32
/// values in x-fastest order.
ScalarGrid read_grid(std::istream& in, const std::string& source = "<stream>");
void write_grid(std::ostream& out, const ScalarGrid& grid);
ScalarGrid read_grid(const std::filesystem::path& path);
void write_grid(const std::filesystem::path& path, const ScalarGrid& grid);

}  // namespace dflow

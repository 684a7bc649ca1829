#pragma once

#include <filesystem>
#include <vector>

#include "dflow/correspond/camera.hpp"
#include "dflow/correspond/lift.hpp"
#include "dflow/correspond/matches.hpp"

namespace dflow {

/// JSON Lines {"view","ub","vb","ua","va","conf"}. Parse errors name the
/// file and line.
std::vector<RawMatch> read_matches(const std::filesystem::path& path);
void write_matches(const std::filesystem::path& path, const std::vector<RawMatch>& matches);

/// JSON array of {"fx","fy","cx","cy","width","height","T_wc": 16 row-major}.
/// A single object is also accepted on read and yields one camera.
std::vector<Camera> read_cameras(const std::filesystem::path& path);
void write_cameras(const std::filesystem::path& path, const std::vector<Camera>& cameras);

/// Grayscale PFM ("Pf"), little-endian (negative scale), rows stored bottom
/// to top.
DepthMap read_pfm(const std::filesystem::path& path);
void write_pfm(const std::filesystem::path& path, const DepthMap& depth);

/// `depth_{view:04}.pfm`
std::filesystem::path depth_filename(std::int32_t view);

}  // namespace dflow

#pragma once

#include <cstdint>
#include <vector>

#include "dflow/correspond/camera.hpp"
#include "dflow/correspond/lift.hpp"
#include "dflow/correspond/matches.hpp"
#include "dflow/geometry/mesh.hpp"

namespace dflow {

/// Z-buffered rendering of a mesh with pixel centers at integer coordinates.
/// Background pixels have depth 0 and face -1.
struct Rendering {
  DepthMap depth;
  std::vector<std::int32_t> face;
  std::vector<Vec3> barycentric;  ///< perspective-correct, per pixel
};

Rendering render_depth(const TriMesh& mesh, const Camera& camera);

/// Raw 2D matches between a render of `transformed` and renders of `rest`
/// (same faces), produced by following each target pixel's surface point
/// through the shared face and barycentrics into every view where it is
/// visible.
struct MatchFixture {
  Camera target_camera;
  DepthMap target_depth;
  std::vector<Camera> cameras;
  std::vector<DepthMap> depths;
  std::vector<RawMatch> matches;
  std::vector<bool> outlier;
  std::size_t clean = 0;
};

struct FixtureParams {
  std::size_t clean = 500;
  std::size_t outliers = 150;
  std::uint32_t image_size = 256;
  std::size_t views = 4;
};

MatchFixture make_match_fixture(const TriMesh& rest, const TriMesh& transformed,
                                const FixtureParams& params, std::uint64_t seed);

}  // namespace dflow

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dflow/correspond/camera.hpp"
#include "dflow/correspond/matches.hpp"

namespace dflow {

/// Row-major depth raster, row 0 at the top. 0 and non-finite values mark
/// background.
struct DepthMap {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<float> values;

  float at(std::uint32_t x, std::uint32_t y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  /// Depth at the nearest pixel, or 0 outside the raster.
  double sample(double u, double v) const;
};

struct CorrespondencePair {
  Point3 source;  ///< p^A
  Point3 target;  ///< p^B
  std::int32_t view = 0;
  std::int32_t density = 0;
};

/// A camera and the depth rendered from it.
struct DepthView {
  Camera camera;
  DepthMap depth;
};

struct LiftResult {
  std::vector<CorrespondencePair> pairs;
  std::size_t skipped = 0;
};

/// Lifts every match through the transformed view and its source view.
/// Matches on background depth, or naming an unknown view, are skipped and
/// counted. Throws InvalidInput when a depth raster does not match its
/// camera's size.
LiftResult lift_pairs(std::span<const RawMatch> matches, const DepthView& transformed,
                      std::span<const DepthView> originals);

}  // namespace dflow

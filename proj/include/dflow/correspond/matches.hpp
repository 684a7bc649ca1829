#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace dflow {

/// A 2D match between pixel (ub, vb) of the transformed image and pixel
/// (ua, va) of original view `view`.
struct RawMatch {
  std::int32_t view = 0;
  double ub = 0.0;
  double vb = 0.0;
  double ua = 0.0;
  double va = 0.0;
  double confidence = 0.0;
  /// Neighbour score assigned by fuse_multiview.
  std::int32_t density = 0;
};

/// Keeps matches with confidence >= threshold, in order.
std::vector<RawMatch> confidence_filter(std::span<const RawMatch> matches, double threshold);

/// Number of distinct transformed-image pixels matched to `view` within
/// Chebyshev distance `radius` of (ub, vb), excluding that pixel itself.
/// Pixels are rounded to integers first.
std::int32_t neighbor_density(std::span<const RawMatch> matches, std::int32_t view, double ub,
                              double vb, std::int32_t radius = 1);

enum class PatchScore {
  Neighbors,       ///< occupied pixels within the Chebyshev radius
  ConnectedPatch,  ///< size of the 8-connected occupied patch, minus the pixel itself
};

/// One match per rounded transformed pixel: the largest score wins, then the
/// higher confidence, then the lower view id, then the smaller source pixel.
/// The order is total, so the output does not depend on input order. Output
/// is sorted by (vb, ub) pixel.
std::vector<RawMatch> fuse_multiview(std::span<const RawMatch> matches, std::int32_t radius = 1,
                                     PatchScore score = PatchScore::Neighbors);

}  // namespace dflow

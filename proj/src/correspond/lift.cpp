#include "dflow/correspond/lift.hpp"

#include <cmath>
#include <string>

#include "dflow/errors.hpp"

namespace dflow {
namespace {

void check_raster(const DepthView& view, const std::string& name) {
  view.camera.validate();
  if (view.depth.width != view.camera.width || view.depth.height != view.camera.height ||
      view.depth.values.size() != static_cast<std::size_t>(view.depth.width) * view.depth.height) {
    throw InvalidInput(name + " depth raster does not match its camera");
  }
}

bool valid_depth(double d) { return std::isfinite(d) && d > 0.0; }

}  // namespace

double DepthMap::sample(double u, double v) const {
  const double x = std::round(u);
  const double y = std::round(v);
  if (!(x >= 0.0 && y >= 0.0 && x < width && y < height)) return 0.0;
  return at(static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y));
}

LiftResult lift_pairs(std::span<const RawMatch> matches, const DepthView& transformed,
                      std::span<const DepthView> originals) {
  check_raster(transformed, "transformed view");
  for (std::size_t i = 0; i < originals.size(); ++i) check_raster(originals[i], "view " + std::to_string(i));

  LiftResult result;
  for (const auto& m : matches) {
    if (m.view < 0 || static_cast<std::size_t>(m.view) >= originals.size()) {
      ++result.skipped;
      continue;
    }
    const DepthView& source = originals[static_cast<std::size_t>(m.view)];
    const double db = transformed.depth.sample(m.ub, m.vb);
    const double da = source.depth.sample(m.ua, m.va);
    if (!valid_depth(db) || !valid_depth(da) || !transformed.camera.contains(m.ub, m.vb) ||
        !source.camera.contains(m.ua, m.va)) {
      ++result.skipped;
      continue;
    }
    result.pairs.push_back({unproject(source.camera, m.ua, m.va, da),
                            unproject(transformed.camera, m.ub, m.vb, db), m.view, m.density});
  }
  return result;
}

}  // namespace dflow

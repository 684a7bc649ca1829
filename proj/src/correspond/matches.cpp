#include "dflow/correspond/matches.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "dflow/errors.hpp"

namespace dflow {
namespace {

struct PixelKey {
  std::int64_t x;
  std::int64_t y;
  bool operator==(const PixelKey&) const = default;
};

struct PixelHash {
  std::size_t operator()(const PixelKey& k) const {
    return std::hash<std::int64_t>()(k.x * 73856093LL ^ k.y * 19349663LL);
  }
};

PixelKey pixel_of(double u, double v) { return {std::llround(u), std::llround(v)}; }

using PixelSet = std::unordered_set<PixelKey, PixelHash>;

std::int32_t count_neighbors(const PixelSet& occupied, PixelKey p, std::int32_t radius) {
  std::int32_t n = 0;
  for (std::int64_t dy = -radius; dy <= radius; ++dy) {
    for (std::int64_t dx = -radius; dx <= radius; ++dx) {
      if (dx == 0 && dy == 0) continue;
      n += occupied.count({p.x + dx, p.y + dy}) != 0;
    }
  }
  return n;
}

// Labels the 8-connected components of one view's occupied pixels.
std::unordered_map<PixelKey, std::int32_t, PixelHash> patch_sizes(const PixelSet& occupied) {
  std::vector<PixelKey> pixels(occupied.begin(), occupied.end());
  std::sort(pixels.begin(), pixels.end(), [](auto a, auto b) { return std::tie(a.y, a.x) < std::tie(b.y, b.x); });
  std::unordered_map<PixelKey, std::int32_t, PixelHash> size;
  std::vector<PixelKey> stack;
  std::vector<PixelKey> member;
  for (const auto& seed : pixels) {
    if (size.count(seed)) continue;
    member.clear();
    stack.assign(1, seed);
    size[seed] = 0;
    while (!stack.empty()) {
      const PixelKey p = stack.back();
      stack.pop_back();
      member.push_back(p);
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
          const PixelKey q{p.x + dx, p.y + dy};
          if (occupied.count(q) && !size.count(q)) {
            size[q] = 0;
            stack.push_back(q);
          }
        }
      }
    }
    for (const auto& p : member) size[p] = static_cast<std::int32_t>(member.size()) - 1;
  }
  return size;
}

// True when a should be kept over b.
bool better(const RawMatch& a, const RawMatch& b) {
  if (a.density != b.density) return a.density > b.density;
  if (a.confidence != b.confidence) return a.confidence > b.confidence;
  if (a.view != b.view) return a.view < b.view;
  return std::tie(a.ua, a.va, a.ub, a.vb) < std::tie(b.ua, b.va, b.ub, b.vb);
}

}  // namespace

std::vector<RawMatch> confidence_filter(std::span<const RawMatch> matches, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw InvalidParams("confidence threshold must lie in [0, 1]");
  std::vector<RawMatch> out;
  for (const auto& m : matches) {
    if (m.confidence >= threshold) out.push_back(m);
  }
  return out;
}

std::int32_t neighbor_density(std::span<const RawMatch> matches, std::int32_t view, double ub,
                              double vb, std::int32_t radius) {
  if (radius < 1) throw InvalidParams("neighbour radius must be at least 1");
  PixelSet occupied;
  for (const auto& m : matches) {
    if (m.view == view) occupied.insert(pixel_of(m.ub, m.vb));
  }
  return count_neighbors(occupied, pixel_of(ub, vb), radius);
}

std::vector<RawMatch> fuse_multiview(std::span<const RawMatch> matches, std::int32_t radius,
                                     PatchScore score) {
  if (radius < 1) throw InvalidParams("neighbour radius must be at least 1");
  std::unordered_map<std::int32_t, PixelSet> per_view;
  for (const auto& m : matches) per_view[m.view].insert(pixel_of(m.ub, m.vb));

  std::unordered_map<std::int32_t, std::unordered_map<PixelKey, std::int32_t, PixelHash>> patches;
  if (score == PatchScore::ConnectedPatch) {
    for (const auto& [view, occupied] : per_view) patches[view] = patch_sizes(occupied);
  }

  std::unordered_map<PixelKey, RawMatch, PixelHash> best;
  for (RawMatch m : matches) {
    const PixelKey p = pixel_of(m.ub, m.vb);
    m.density = score == PatchScore::Neighbors ? count_neighbors(per_view[m.view], p, radius)
                                               : patches[m.view].at(p);
    auto [it, inserted] = best.try_emplace(p, m);
    if (!inserted && better(m, it->second)) it->second = m;
  }

  std::vector<std::pair<PixelKey, RawMatch>> sorted(best.begin(), best.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return std::tie(a.first.y, a.first.x) < std::tie(b.first.y, b.first.x);
  });
  std::vector<RawMatch> out;
  out.reserve(sorted.size());
  for (auto& [key, m] : sorted) out.push_back(m);
  return out;
}

}  // namespace dflow

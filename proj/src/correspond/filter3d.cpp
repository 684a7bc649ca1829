#include "dflow/correspond/filter3d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "dflow/errors.hpp"

namespace dflow {
namespace {

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellHash {
  std::size_t operator()(const CellKey& k) const {
    return static_cast<std::size_t>(k.x * 73856093LL ^ k.y * 19349663LL ^ k.z * 83492791LL);
  }
};

double median(std::vector<double> v) {
  const std::size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + n / 2, v.end());
  const double hi = v[n / 2];
  if (n % 2) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + n / 2);
  return 0.5 * (lo + hi);
}

}  // namespace

std::vector<std::vector<std::uint32_t>> cluster_points(std::span<const Point3> points, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidParams("cluster radius must be positive");
  std::vector<std::vector<std::uint32_t>> clusters;
  std::vector<Point3> leaders;
  std::unordered_map<CellKey, std::vector<std::uint32_t>, CellHash> grid;
  const double r2 = radius * radius;
  auto cell_of = [&](const Point3& p) {
    return CellKey{static_cast<std::int64_t>(std::floor(p.x() / radius)),
                   static_cast<std::int64_t>(std::floor(p.y() / radius)),
                   static_cast<std::int64_t>(std::floor(p.z() / radius))};
  };

  for (std::uint32_t i = 0; i < points.size(); ++i) {
    const Point3& p = points[i];
    if (!p.allFinite()) throw InvalidInput("cluster point " + std::to_string(i) + " is not finite");
    const CellKey c = cell_of(p);
    std::uint32_t chosen = std::numeric_limits<std::uint32_t>::max();
    for (std::int64_t dz = -1; dz <= 1; ++dz)
      for (std::int64_t dy = -1; dy <= 1; ++dy)
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
          const auto it = grid.find({c.x + dx, c.y + dy, c.z + dz});
          if (it == grid.end()) continue;
          for (std::uint32_t id : it->second) {
            if (id < chosen && (leaders[id] - p).squaredNorm() <= r2) chosen = id;
          }
        }
    if (chosen == std::numeric_limits<std::uint32_t>::max()) {
      chosen = static_cast<std::uint32_t>(clusters.size());
      clusters.emplace_back();
      leaders.push_back(p);
      grid[c].push_back(chosen);
    }
    clusters[chosen].push_back(i);
  }
  return clusters;
}

void Filter3dParams::validate() const {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidParams("cluster radius must be positive");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw InvalidParams("kappa must be positive");
  if (min_cluster < 2) throw InvalidParams("minimum cluster size must be at least 2");
}

Filter3dResult filter_3d_indices(std::span<const CorrespondencePair> pairs, const Filter3dParams& params) {
  params.validate();
  std::vector<Point3> sources(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!pairs[i].source.allFinite() || !pairs[i].target.allFinite()) {
      throw InvalidInput("pair " + std::to_string(i) + " is not finite");
    }
    sources[i] = pairs[i].source;
  }

  Filter3dResult result;
  const auto clusters = cluster_points(sources, params.radius);
  result.clusters = clusters.size();
  std::vector<double> comp;
  std::vector<double> deviation;
  for (const auto& cluster : clusters) {
    if (cluster.size() < params.min_cluster) {
      result.small_cluster_drops += cluster.size();
      continue;
    }
    Vec3 center;
    for (int c = 0; c < 3; ++c) {
      comp.clear();
      for (auto i : cluster) comp.push_back(pairs[i].target[c] - pairs[i].source[c]);
      center[c] = median(comp);
    }
    deviation.clear();
    for (auto i : cluster) deviation.push_back((pairs[i].target - pairs[i].source - center).norm());
    const double threshold = std::max(params.radius, params.kappa * median(deviation));
    for (std::size_t j = 0; j < cluster.size(); ++j) {
      if (deviation[j] <= threshold) {
        result.kept.push_back(cluster[j]);
      } else {
        ++result.deviation_drops;
      }
    }
  }
  std::sort(result.kept.begin(), result.kept.end());
  return result;
}

std::vector<CorrespondencePair> filter_3d(std::span<const CorrespondencePair> pairs,
                                          const Filter3dParams& params) {
  const auto r = filter_3d_indices(pairs, params);
  std::vector<CorrespondencePair> out;
  out.reserve(r.kept.size());
  for (auto i : r.kept) out.push_back(pairs[i]);
  return out;
}

SnapResult snap_to_anchors(std::span<const CorrespondencePair> pairs, const TriMesh& mesh,
                           const KnnIndex& vertex_index) {
  if (mesh.empty()) throw EmptyPointSet();
  if (vertex_index.size() != mesh.vertex_count()) throw InvalidInput("vertex index does not match the mesh");
  struct Slot {
    double distance;
    std::size_t pair;
  };
  std::unordered_map<std::uint32_t, Slot> best;
  SnapResult result;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Neighbor n = vertex_index.nearest(pairs[i].source);
    auto [it, inserted] = best.try_emplace(n.index, Slot{n.distance, i});
    if (!inserted) {
      ++result.duplicates;
      if (n.distance < it->second.distance) it->second = {n.distance, i};
    }
  }
  result.anchors.reserve(best.size());
  for (const auto& [vertex, slot] : best) {
    result.anchors.push_back({vertex, mesh.vertices()[vertex], pairs[slot.pair].target});
  }
  std::sort(result.anchors.begin(), result.anchors.end(),
            [](const Anchor& a, const Anchor& b) { return a.vertex < b.vertex; });
  return result;
}

}  // namespace dflow

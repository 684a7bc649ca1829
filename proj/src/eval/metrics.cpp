#include "dflow/eval/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <nlohmann/json.hpp>
#include <random>

#include "dflow/errors.hpp"
#include "dflow/geometry/knn.hpp"
#include "dflow/parallel.hpp"

namespace dflow {
namespace {

double unit_real(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double mean_nearest_squared(std::span<const Point3> from, const KnnIndex& to) {
  std::vector<double> d(from.size());
  parallel_for(from.size(), [&](std::size_t i) {
    d[i] = (to.points()[to.nearest(from[i]).index] - from[i]).squaredNorm();
  });
  double sum = 0.0;
  for (double x : d) sum += x;
  return sum / static_cast<double>(from.size());
}

// 2D point in the (y, z) plane of a ray cast along +x.
struct P2 {
  double y, z;
};

// Orientation of q against the directed edge a -> b, computed with the
// endpoints in a fixed order so the two triangles sharing an edge see
// exactly opposite values.
double edge_function(P2 a, P2 b, P2 q, bool& top_left) {
  const bool swap = std::tie(b.y, b.z) < std::tie(a.y, a.z);
  const P2 s = swap ? b : a;
  const P2 e = swap ? a : b;
  double w = (e.y - s.y) * (q.z - s.z) - (e.z - s.z) * (q.y - s.y);
  if (swap) w = -w;
  // an edge owns the points on it when it is "top" (horizontal, pointing -y)
  // or "left" (pointing +z) for positively oriented triangles
  const double dy = b.y - a.y;
  const double dz = b.z - a.z;
  top_left = dz > 0.0 || (dz == 0.0 && dy < 0.0);
  return w;
}

struct RowHits {
  std::vector<std::vector<double>> hits;  // x of every crossing, per (j, k) row
};

// Crossings of every +x ray through voxel-center rows with the mesh.
std::vector<std::vector<double>> cast_rows(const TriMesh& mesh, const Point3& origin, const Vec3& step,
                                           std::uint32_t res) {
  std::vector<std::vector<std::uint32_t>> buckets(static_cast<std::size_t>(res) * res);
  const auto& v = mesh.vertices();
  const auto& faces = mesh.faces();
  auto row_range = [&](double lo, double hi, int axis, std::int64_t& first, std::int64_t& last) {
    first = static_cast<std::int64_t>(std::ceil((lo - origin[axis]) / step[axis] - 0.5));
    last = static_cast<std::int64_t>(std::floor((hi - origin[axis]) / step[axis] - 0.5));
    first = std::max<std::int64_t>(first, 0);
    last = std::min<std::int64_t>(last, res - 1);
  };
  for (std::uint32_t f = 0; f < faces.size(); ++f) {
    const Point3& a = v[faces[f][0]];
    const Point3& b = v[faces[f][1]];
    const Point3& c = v[faces[f][2]];
    std::int64_t j0, j1, k0, k1;
    row_range(std::min({a.y(), b.y(), c.y()}), std::max({a.y(), b.y(), c.y()}), 1, j0, j1);
    row_range(std::min({a.z(), b.z(), c.z()}), std::max({a.z(), b.z(), c.z()}), 2, k0, k1);
    for (std::int64_t k = k0; k <= k1; ++k)
      for (std::int64_t j = j0; j <= j1; ++j) buckets[static_cast<std::size_t>(k) * res + j].push_back(f);
  }

  std::vector<std::vector<double>> rows(buckets.size());
  parallel_for(buckets.size(), [&](std::size_t r) {
    const std::uint32_t j = static_cast<std::uint32_t>(r % res);
    const std::uint32_t k = static_cast<std::uint32_t>(r / res);
    const P2 q{origin.y() + (j + 0.5) * step.y(), origin.z() + (k + 0.5) * step.z()};
    for (std::uint32_t f : buckets[r]) {
      std::array<Point3, 3> p = {v[faces[f][0]], v[faces[f][1]], v[faces[f][2]]};
      std::array<P2, 3> s = {P2{p[0].y(), p[0].z()}, P2{p[1].y(), p[1].z()}, P2{p[2].y(), p[2].z()}};
      bool tl;
      const double area = edge_function(s[0], s[1], s[2], tl);
      if (area == 0.0) continue;
      if (area < 0.0) {
        std::swap(s[1], s[2]);
        std::swap(p[1], p[2]);
      }
      std::array<double, 3> w;
      bool inside = true;
      for (int e = 0; e < 3 && inside; ++e) {
        bool top_left;
        w[e] = edge_function(s[(e + 1) % 3], s[(e + 2) % 3], q, top_left);
        inside = w[e] > 0.0 || (w[e] == 0.0 && top_left);
      }
      if (!inside) continue;
      const double sum = w[0] + w[1] + w[2];
      rows[r].push_back((w[0] * p[0].x() + w[1] * p[1].x() + w[2] * p[2].x()) / sum);
    }
    std::sort(rows[r].begin(), rows[r].end());
  });
  return rows;
}

}  // namespace

double chamfer_distance(std::span<const Point3> a, std::span<const Point3> b) {
  if (a.empty() || b.empty()) throw EmptySet();
  const KnnIndex ia(std::vector<Point3>(a.begin(), a.end()));
  const KnnIndex ib(std::vector<Point3>(b.begin(), b.end()));
  return mean_nearest_squared(a, ib) + mean_nearest_squared(b, ia);
}

std::vector<Point3> sample_surface(const TriMesh& mesh, std::size_t count, std::uint64_t seed) {
  if (mesh.face_count() == 0) throw EmptySet();
  const auto& v = mesh.vertices();
  const auto& faces = mesh.faces();
  std::vector<double> cumulative(faces.size());
  double total = 0.0;
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Point3& a = v[faces[f][0]];
    total += 0.5 * (v[faces[f][1]] - a).cross(v[faces[f][2]] - a).norm();
    cumulative[f] = total;
  }
  if (!(total > 0.0)) throw InvalidInput("mesh has zero surface area");

  std::mt19937_64 rng(seed);
  std::vector<Point3> out(count);
  for (auto& p : out) {
    const double pick = unit_real(rng) * total;
    const std::size_t f = std::min<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin(), faces.size() - 1);
    double r1 = unit_real(rng);
    double r2 = unit_real(rng);
    if (r1 + r2 > 1.0) {
      r1 = 1.0 - r1;
      r2 = 1.0 - r2;
    }
    const Point3& a = v[faces[f][0]];
    p = a + r1 * (v[faces[f][1]] - a) + r2 * (v[faces[f][2]] - a);
  }
  return out;
}

double chamfer_distance(const TriMesh& a, const TriMesh& b, std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw EmptySet();
  const auto sa = sample_surface(a, samples, seed);
  const auto sb = sample_surface(b, samples, seed);
  return chamfer_distance(sa, sb);
}

VolumeIou volume_iou_detailed(const TriMesh& a, const TriMesh& b, std::uint32_t resolution) {
  if (resolution < 16) throw InvalidParams("volume IoU resolution must be at least 16");
  if (a.face_count() == 0 || b.face_count() == 0) throw EmptySet();
  BoundingBox box = a.bounds();
  box.extend(b.bounds());
  Vec3 step = (box.max - box.min) / static_cast<double>(resolution);
  for (int i = 0; i < 3; ++i) {
    if (!(step[i] > 0.0)) step[i] = 1.0;  // flat along an axis: any positive extent will do
  }

  const auto rows_a = cast_rows(a, box.min, step, resolution);
  const auto rows_b = cast_rows(b, box.min, step, resolution);

  std::vector<std::array<std::uint64_t, 3>> counts(rows_a.size());  // intersection, union, odd rays
  parallel_for(rows_a.size(), [&](std::size_t r) {
    const auto& ha = rows_a[r];
    const auto& hb = rows_b[r];
    std::size_t ia = 0, ib = 0;
    std::uint64_t inter = 0, uni = 0;
    for (std::uint32_t i = 0; i < resolution; ++i) {
      const double x = box.min.x() + (i + 0.5) * step.x();
      while (ia < ha.size() && ha[ia] < x) ++ia;
      while (ib < hb.size() && hb[ib] < x) ++ib;
      const bool in_a = ia % 2 == 1;
      const bool in_b = ib % 2 == 1;
      inter += in_a && in_b;
      uni += in_a || in_b;
    }
    counts[r] = {inter, uni, static_cast<std::uint64_t>(ha.size() % 2 + hb.size() % 2)};
  });

  std::uint64_t inter = 0, uni = 0, odd = 0;
  for (const auto& c : counts) {
    inter += c[0];
    uni += c[1];
    odd += c[2];
  }
  VolumeIou out;
  out.iou = uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
  out.odd_ray_fraction = static_cast<double>(odd) / (2.0 * static_cast<double>(rows_a.size()));
  out.non_watertight = out.odd_ray_fraction > 1e-3;
  return out;
}

double volume_iou(const TriMesh& a, const TriMesh& b, std::uint32_t resolution) {
  return volume_iou_detailed(a, b, resolution).iou;
}

bool success(double cd, double threshold) {
  if (!(cd >= 0.0)) throw InvalidInput("chamfer distance must be non-negative");
  return cd < threshold;
}

MetricReport evaluate(const TriMesh& predicted, const TriMesh& truth, const EvalOptions& options) {
  MetricReport r;
  r.cd = chamfer_distance(predicted, truth, options.samples, options.seed);
  r.cd_x1000 = r.cd * 1000.0;
  const auto iou = volume_iou_detailed(predicted, truth, options.resolution);
  r.vmiou = iou.iou;
  r.non_watertight = iou.non_watertight;
  r.success = success(r.cd, options.threshold);
  return r;
}

nlohmann::json to_json(const MetricReport& report) {
  return {{"cd", report.cd}, {"cd_x1000", report.cd_x1000}, {"vmiou", report.vmiou}, {"success", report.success}};
}

}  // namespace dflow

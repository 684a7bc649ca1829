#include "dflow/eval/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <array>
#include <map>

#include "dflow/errors.hpp"
#include "dflow/flow/flow.hpp"

namespace dflow {
namespace {

constexpr double kRadius = 0.12;
constexpr double kLength = 0.8;
constexpr double kBase = 0.1;
constexpr int kSegments = 100;
constexpr int kRings = 81;
constexpr int kCapRings = 10;
const Point3 kAxis(0.5, 0.5, 0.0);

double unit_real(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(unit_real(rng) * static_cast<double>(n)));
}

Mat3 rot_y(double a) {
  Mat3 r;
  r << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return r;
}

Mat3 rot_z(double a) {
  Mat3 r;
  r << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return r;
}

// Appends a tessellated box surface, wound outward, with n cells per unit length.
void append_box(const Point3& lo, const Point3& hi, double cells_per_unit, std::vector<Point3>& verts,
                std::vector<Face>& faces) {
  const Vec3 size = hi - lo;
  std::array<int, 3> n;
  for (int a = 0; a < 3; ++a) n[a] = std::max(1, static_cast<int>(std::lround(size[a] * cells_per_unit)));
  // grid points on the box surface, keyed by integer lattice coordinates
  std::map<std::array<int, 3>, std::int32_t> id;
  auto vertex = [&](int i, int j, int k) {
    const std::array<int, 3> key{i, j, k};
    auto it = id.find(key);
    if (it != id.end()) return it->second;
    const auto index = static_cast<std::int32_t>(verts.size());
    verts.emplace_back(lo.x() + size.x() * i / n[0], lo.y() + size.y() * j / n[1], lo.z() + size.z() * k / n[2]);
    id.emplace(key, index);
    return index;
  };
  // each face: fixed axis a at side s (0 or n[a]); (u, v) span the other axes
  for (int a = 0; a < 3; ++a) {
    const int u = (a + 1) % 3;
    const int v = (a + 2) % 3;
    for (int side = 0; side < 2; ++side) {
      for (int i = 0; i < n[u]; ++i) {
        for (int j = 0; j < n[v]; ++j) {
          std::array<std::int32_t, 4> q;
          const int corners[4][2] = {{i, j}, {i + 1, j}, {i + 1, j + 1}, {i, j + 1}};
          for (int c = 0; c < 4; ++c) {
            std::array<int, 3> p{};
            p[a] = side ? n[a] : 0;
            p[u] = corners[c][0];
            p[v] = corners[c][1];
            q[c] = vertex(p[0], p[1], p[2]);
          }
          // (u, v, a) is right-handed, so u x v points along +a
          if (side) {
            faces.push_back({q[0], q[1], q[2]});
            faces.push_back({q[0], q[2], q[3]});
          } else {
            faces.push_back({q[0], q[2], q[1]});
            faces.push_back({q[0], q[3], q[2]});
          }
        }
      }
    }
  }
}

struct Motion {
  Mat3 rotation;
  Point3 position;
};

Motion bend(const Point3& p, double angle) {
  const double s = p.z() - kBase;
  const double x = p.x() - kAxis.x();
  if (angle == 0.0) return {Mat3::Identity(), p};
  const double kappa = angle / kLength;
  const double theta = kappa * s;
  const Point3 q(kAxis.x() + x * std::cos(theta) + (1.0 - std::cos(theta)) / kappa, p.y(),
                 kBase - x * std::sin(theta) + std::sin(theta) / kappa);
  return {rot_y(theta), q};
}

Motion twist(const Point3& p, double rate) {
  if (rate == 0.0) return {Mat3::Identity(), p};
  const Mat3 r = rot_z(rate * (p.z() - kBase));
  Point3 q = p;
  q.head<2>() = (r * (p - kAxis)).head<2>() + kAxis.head<2>();
  return {r, q};
}

// Upper box hinges about the y-parallel line through (0.3, *, 0.5).
Motion articulate(const Point3& p, double angle) {
  if (angle == 0.0 || p.z() < 0.5) return {Mat3::Identity(), p};
  const Point3 hinge(0.3, p.y(), 0.5);
  const Mat3 r = rot_y(-angle);
  return {r, r * (p - hinge) + hinge};
}

}  // namespace

SyntheticKind synthetic_kind_from_string(const std::string& name) {
  if (name == "bend") return SyntheticKind::Bend;
  if (name == "twist") return SyntheticKind::Twist;
  if (name == "articulate") return SyntheticKind::Articulate;
  throw InvalidParams("unknown synthetic kind '" + name + "' (expected bend, twist or articulate)");
}

std::string to_string(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::Bend: return "bend";
    case SyntheticKind::Twist: return "twist";
    case SyntheticKind::Articulate: return "articulate";
  }
  return "unknown";
}

void SynthParams::validate(SyntheticKind kind) const {
  const double limit = kind == SyntheticKind::Twist ? 180.0 : 90.0;
  if (!(angle_deg >= 0.0 && angle_deg <= limit)) {
    throw InvalidParams("angle must lie in [0, " + std::to_string(static_cast<int>(limit)) + "] degrees");
  }
  if (!(contamination >= 0.0 && contamination < 1.0)) throw InvalidParams("contamination must lie in [0, 1)");
  if (k == 0) throw InvalidParams("k must be at least 1");
  if (!(surface_gate >= 0.0)) throw InvalidParams("surface gate must be non-negative");
}

TriMesh make_cylinder() {
  std::vector<Point3> v;
  std::vector<Face> f;
  const double step = 2.0 * std::numbers::pi / kSegments;
  auto ring_point = [&](double radius, int i, double z) {
    return Point3(kAxis.x() + radius * std::cos(step * i), kAxis.y() + radius * std::sin(step * i), z);
  };

  // bottom cap: center, then inner rings outward; the rim is lateral ring 0
  const double top = kBase + kLength;
  const auto bottom_center = static_cast<std::int32_t>(v.size());
  v.emplace_back(kAxis.x(), kAxis.y(), kBase);
  std::vector<std::int32_t> bottom_rings;
  for (int m = 1; m < kCapRings; ++m) {
    bottom_rings.push_back(static_cast<std::int32_t>(v.size()));
    for (int i = 0; i < kSegments; ++i) v.push_back(ring_point(kRadius * m / kCapRings, i, kBase));
  }
  const auto lateral = static_cast<std::int32_t>(v.size());
  for (int j = 0; j < kRings; ++j) {
    const double z = kBase + kLength * j / (kRings - 1);
    for (int i = 0; i < kSegments; ++i) v.push_back(ring_point(kRadius, i, z));
  }
  std::vector<std::int32_t> top_rings;
  for (int m = 1; m < kCapRings; ++m) {
    top_rings.push_back(static_cast<std::int32_t>(v.size()));
    for (int i = 0; i < kSegments; ++i) v.push_back(ring_point(kRadius * m / kCapRings, i, top));
  }
  const auto top_center = static_cast<std::int32_t>(v.size());
  v.emplace_back(kAxis.x(), kAxis.y(), top);

  auto at = [](std::int32_t ring, int i) { return ring + (i % kSegments); };
  for (int j = 0; j + 1 < kRings; ++j) {
    const std::int32_t lo = lateral + j * kSegments;
    const std::int32_t hi = lo + kSegments;
    for (int i = 0; i < kSegments; ++i) {
      f.push_back({at(lo, i), at(lo, i + 1), at(hi, i)});
      f.push_back({at(lo, i + 1), at(hi, i + 1), at(hi, i)});
    }
  }
  // cap rings from the center outward, ending at the rim
  auto cap = [&](std::int32_t center, const std::vector<std::int32_t>& rings, std::int32_t rim, bool up) {
    std::vector<std::int32_t> all = rings;
    all.push_back(rim);
    for (int i = 0; i < kSegments; ++i) {
      if (up) f.push_back({at(all[0], i), at(all[0], i + 1), center});
      else f.push_back({at(all[0], i + 1), at(all[0], i), center});
    }
    for (std::size_t m = 0; m + 1 < all.size(); ++m) {
      const std::int32_t inner = all[m];
      const std::int32_t outer = all[m + 1];
      for (int i = 0; i < kSegments; ++i) {
        if (up) {
          f.push_back({at(outer, i), at(outer, i + 1), at(inner, i)});
          f.push_back({at(outer, i + 1), at(inner, i + 1), at(inner, i)});
        } else {
          f.push_back({at(outer, i + 1), at(outer, i), at(inner, i)});
          f.push_back({at(inner, i + 1), at(outer, i + 1), at(inner, i)});
        }
      }
    }
  };
  cap(bottom_center, bottom_rings, lateral, false);
  cap(top_center, top_rings, lateral + (kRings - 1) * kSegments, true);
  return TriMesh(std::move(v), std::move(f));
}

TriMesh make_hinged_boxes() {
  std::vector<Point3> v;
  std::vector<Face> f;
  append_box(Point3(0.3, 0.4, 0.1), Point3(0.7, 0.6, 0.47), 60.0, v, f);
  append_box(Point3(0.3, 0.4, 0.53), Point3(0.7, 0.6, 0.9), 60.0, v, f);
  return TriMesh(std::move(v), std::move(f));
}

SyntheticScene make_synthetic(SyntheticKind kind, const SynthParams& params, std::uint64_t seed) {
  params.validate(kind);
  const double angle = params.angle_deg * std::numbers::pi / 180.0;
  TriMesh rest = kind == SyntheticKind::Articulate ? make_hinged_boxes() : make_cylinder();
  if (params.pairs > rest.vertex_count()) throw InvalidParams("more pairs requested than mesh vertices");

  const auto& verts = rest.vertices();
  std::vector<Mat3> rotations(verts.size());
  std::vector<Vec3> translations(verts.size());
  for (std::size_t i = 0; i < verts.size(); ++i) {
    const Motion m = kind == SyntheticKind::Bend    ? bend(verts[i], angle)
                     : kind == SyntheticKind::Twist ? twist(verts[i], angle)
                                                    : articulate(verts[i], angle);
    rotations[i] = m.rotation;
    translations[i] = m.position - verts[i];
  }
  TransformField truth(verts, std::move(rotations), std::move(translations), params.k, params.surface_gate);
  TriMesh transformed = warp_mesh(truth, rest);

  std::mt19937_64 rng(seed);
  // partial Fisher-Yates for distinct vertices
  std::vector<std::uint32_t> order(verts.size());
  for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = 0; i < params.pairs; ++i) {
    std::swap(order[i], order[i + uniform_index(rng, order.size() - i)]);
  }

  SyntheticScene scene{kind, std::move(rest), std::move(truth), std::move(transformed), {}, {}, 0};
  for (std::size_t i = 0; i < params.pairs; ++i) {
    const std::uint32_t v = order[i];
    const Point3& a = scene.rest.vertices()[v];
    scene.clean.push_back({v, {a, forward_flow(scene.truth, a), 0, 0}, false});
  }

  scene.contaminated = scene.clean;
  scene.outliers = static_cast<std::size_t>(std::llround(params.contamination * static_cast<double>(params.pairs)));
  std::vector<std::size_t> slots(params.pairs);
  for (std::size_t i = 0; i < slots.size(); ++i) slots[i] = i;
  for (std::size_t i = 0; i < scene.outliers; ++i) {
    std::swap(slots[i], slots[i + uniform_index(rng, slots.size() - i)]);
  }
  std::sort(slots.begin(), slots.begin() + static_cast<std::ptrdiff_t>(scene.outliers));
  const BoundingBox box = scene.transformed.bounds();
  for (std::size_t i = 0; i < scene.outliers; ++i) {
    auto& item = scene.contaminated[slots[i]];
    for (int c = 0; c < 3; ++c) item.pair.target[c] = box.min[c] + unit_real(rng) * (box.max[c] - box.min[c]);
    item.outlier = true;
  }
  return scene;
}

}  // namespace dflow

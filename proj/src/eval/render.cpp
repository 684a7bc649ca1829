#include "dflow/eval/render.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_set>

#include "dflow/errors.hpp"

namespace dflow {
namespace {

constexpr double kNear = 1e-6;
constexpr double kVisibilityTolerance = 0.01;

double unit_real(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(unit_real(rng) * static_cast<double>(n)));
}

Camera fixture_camera(const Eigen::Matrix4d& pose, std::uint32_t size) {
  Camera c;
  c.fx = c.fy = size;
  c.cx = c.cy = 0.5 * (size - 1);
  c.width = c.height = size;
  c.pose = pose;
  return c;
}

}  // namespace

Rendering render_depth(const TriMesh& mesh, const Camera& camera) {
  camera.validate();
  const std::size_t pixels = static_cast<std::size_t>(camera.width) * camera.height;
  Rendering r;
  r.depth.width = camera.width;
  r.depth.height = camera.height;
  r.depth.values.assign(pixels, 0.0f);
  r.face.assign(pixels, -1);
  r.barycentric.assign(pixels, Vec3::Zero());
  std::vector<double> zbuf(pixels, INFINITY);

  const auto& v = mesh.vertices();
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const auto& face = mesh.faces()[f];
    Projection p[3];
    bool visible = true;
    for (int i = 0; i < 3; ++i) {
      p[i] = project(camera, v[face[i]]);
      visible = visible && p[i].depth > kNear;
    }
    if (!visible) continue;
    const double area = (p[1].u - p[0].u) * (p[2].v - p[0].v) - (p[1].v - p[0].v) * (p[2].u - p[0].u);
    if (area == 0.0) continue;
    const double umin = std::min({p[0].u, p[1].u, p[2].u});
    const double umax = std::max({p[0].u, p[1].u, p[2].u});
    const double vmin = std::min({p[0].v, p[1].v, p[2].v});
    const double vmax = std::max({p[0].v, p[1].v, p[2].v});
    const long x0 = std::max(0L, static_cast<long>(std::ceil(umin)));
    const long x1 = std::min(static_cast<long>(camera.width) - 1, static_cast<long>(std::floor(umax)));
    const long y0 = std::max(0L, static_cast<long>(std::ceil(vmin)));
    const long y1 = std::min(static_cast<long>(camera.height) - 1, static_cast<long>(std::floor(vmax)));
    for (long y = y0; y <= y1; ++y) {
      for (long x = x0; x <= x1; ++x) {
        double l[3];
        for (int i = 0; i < 3; ++i) {
          const Projection& a = p[(i + 1) % 3];
          const Projection& b = p[(i + 2) % 3];
          l[i] = ((b.u - a.u) * (y - a.v) - (b.v - a.v) * (x - a.u)) / area;
        }
        if (l[0] < 0.0 || l[1] < 0.0 || l[2] < 0.0) continue;
        const double w0 = l[0] / p[0].depth, w1 = l[1] / p[1].depth, w2 = l[2] / p[2].depth;
        const double z = 1.0 / (w0 + w1 + w2);
        const std::size_t idx = static_cast<std::size_t>(y) * camera.width + x;
        if (z < zbuf[idx]) {
          zbuf[idx] = z;
          r.depth.values[idx] = static_cast<float>(z);
          r.face[idx] = static_cast<std::int32_t>(f);
          r.barycentric[idx] = Vec3(w0 * z, w1 * z, w2 * z);
        }
      }
    }
  }
  return r;
}

MatchFixture make_match_fixture(const TriMesh& rest, const TriMesh& transformed, const FixtureParams& params,
                                std::uint64_t seed) {
  if (rest.faces() != transformed.faces()) throw InvalidInput("fixture meshes must share their faces");
  if (params.views == 0 || params.image_size < 16) throw InvalidParams("fixture needs views and images of 16+ pixels");
  const BoundingBox rest_box = rest.bounds();
  const BoundingBox moved_box = transformed.bounds();
  const double distance = 1.5 * std::max(rest_box.diagonal(), moved_box.diagonal());

  MatchFixture fx;
  fx.target_camera = fixture_camera(
      hemisphere_poses(1, distance, 0.5 * (moved_box.min + moved_box.max), {0.0}).front(), params.image_size);
  const Rendering target = render_depth(transformed, fx.target_camera);
  fx.target_depth = target.depth;

  std::vector<Rendering> views;
  for (const auto& pose : hemisphere_poses(params.views, distance, 0.5 * (rest_box.min + rest_box.max), {0.0})) {
    fx.cameras.push_back(fixture_camera(pose, params.image_size));
    views.push_back(render_depth(rest, fx.cameras.back()));
    fx.depths.push_back(views.back().depth);
  }

  // target pixels nearest the foreground centroid first, so clean matches
  // form one dense patch
  std::vector<std::size_t> foreground;
  double cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < target.face.size(); ++i) {
    if (target.face[i] < 0) continue;
    foreground.push_back(i);
    cx += static_cast<double>(i % params.image_size);
    cy += static_cast<double>(i / params.image_size);
  }
  if (foreground.empty()) throw InvalidInput("transformed mesh is not visible from the target camera");
  cx /= static_cast<double>(foreground.size());
  cy /= static_cast<double>(foreground.size());
  auto dist2 = [&](std::size_t i) {
    const double dx = static_cast<double>(i % params.image_size) - cx;
    const double dy = static_cast<double>(i / params.image_size) - cy;
    return dx * dx + dy * dy;
  };
  std::vector<std::size_t> order = foreground;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist2(a) < dist2(b); });

  std::unordered_set<std::size_t> used;
  std::size_t candidate = 0;
  for (std::size_t idx : order) {
    if (fx.clean >= params.clean) break;
    const auto& face = rest.faces()[static_cast<std::size_t>(target.face[idx])];
    const Vec3& b = target.barycentric[idx];
    const Point3 pa = b[0] * rest.vertices()[face[0]] + b[1] * rest.vertices()[face[1]] + b[2] * rest.vertices()[face[2]];
    int emitted = 0;
    for (std::size_t k = 0; k < views.size() && emitted < 2; ++k) {
      const Projection pr = project(fx.cameras[k], pa);
      const double ua = std::round(pr.u), va = std::round(pr.v);
      if (!fx.cameras[k].contains(ua, va) || pr.depth <= 0.0) continue;
      const double seen = fx.depths[k].sample(ua, va);
      if (!(seen > 0.0) || std::abs(seen - pr.depth) > kVisibilityTolerance) continue;
      RawMatch m;
      m.view = static_cast<std::int32_t>(k);
      m.ub = static_cast<double>(idx % params.image_size);
      m.vb = static_cast<double>(idx / params.image_size);
      m.ua = ua;
      m.va = va;
      m.confidence = emitted == 0 ? 0.9 : 0.95;
      fx.matches.push_back(m);
      fx.outlier.push_back(false);
      ++emitted;
      // every fifth pixel also gets a sparse second-view duplicate
      if (candidate % 5 != 0) break;
    }
    if (emitted > 0) {
      ++fx.clean;
      used.insert(idx);
    }
    ++candidate;
  }

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> free_pixels;
  for (std::size_t idx : foreground) {
    if (!used.count(idx)) free_pixels.push_back(idx);
  }
  std::vector<std::vector<std::size_t>> view_foreground(views.size());
  for (std::size_t k = 0; k < views.size(); ++k) {
    for (std::size_t i = 0; i < views[k].face.size(); ++i) {
      if (views[k].face[i] >= 0) view_foreground[k].push_back(i);
    }
  }
  for (std::size_t n = 0; n < params.outliers && !free_pixels.empty(); ++n) {
    const std::size_t pick = uniform_index(rng, free_pixels.size());
    const std::size_t idx = free_pixels[pick];
    free_pixels[pick] = free_pixels.back();
    free_pixels.pop_back();
    const std::size_t k = uniform_index(rng, views.size());
    if (view_foreground[k].empty()) continue;
    const std::size_t src = view_foreground[k][uniform_index(rng, view_foreground[k].size())];
    RawMatch m;
    m.view = static_cast<std::int32_t>(k);
    m.ub = static_cast<double>(idx % params.image_size);
    m.vb = static_cast<double>(idx / params.image_size);
    m.ua = static_cast<double>(src % params.image_size);
    m.va = static_cast<double>(src / params.image_size);
    m.confidence = 0.8;
    fx.matches.push_back(m);
    fx.outlier.push_back(true);
  }
  return fx;
}

}  // namespace dflow

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "dflow/errors.hpp"
#include "dflow/geometry/io.hpp"
#include "dflow/geometry/knn.hpp"
#include "dflow/geometry/marching_cubes.hpp"
#include "dflow/geometry/mesh.hpp"
#include "dflow/geometry/rigid.hpp"
#include "support.hpp"

using namespace dflow;
using testing::random_point;
using testing::random_points;
using testing::random_rotation;

namespace {

// Homogeneous composition T(v + t) * R * T(-v).
Point3 homogeneous_apply(const Mat3& r, const Point3& v, const Vec3& t, const Point3& p) {
  Eigen::Matrix4d shift_back = Eigen::Matrix4d::Identity();
  shift_back.block<3, 1>(0, 3) = -v;
  Eigen::Matrix4d rot = Eigen::Matrix4d::Identity();
  rot.block<3, 3>(0, 0) = r;
  Eigen::Matrix4d shift = Eigen::Matrix4d::Identity();
  shift.block<3, 1>(0, 3) = v + t;
  const Eigen::Vector4d h = shift * rot * shift_back * Eigen::Vector4d(p.x(), p.y(), p.z(), 1.0);
  return h.head<3>();
}

std::vector<Neighbor> brute_knn(const std::vector<Point3>& pts, const Point3& q, std::size_t k) {
  std::vector<std::pair<double, std::uint32_t>> all;
  for (std::uint32_t i = 0; i < pts.size(); ++i) all.emplace_back((pts[i] - q).squaredNorm(), i);
  std::sort(all.begin(), all.end());
  std::vector<Neighbor> out;
  for (std::size_t i = 0; i < std::min(k, all.size()); ++i) {
    out.push_back({all[i].second, std::sqrt(all[i].first)});
  }
  return out;
}

}  // namespace

TEST_CASE("apply_rigid identity and quarter turn") {
  const Point3 p(1, 2, 3);
  CHECK(apply_rigid(AnchoredRigid::identity(Point3::Zero()), p) == p);
  CHECK(apply_rigid_inverse(AnchoredRigid::identity(Point3::Zero()), p) == p);

  const auto xi = AnchoredRigid::make(testing::rot_z(M_PI / 2), Point3(1, 0, 0), Vec3(0, 0, 1));
  CHECK((apply_rigid(xi, Point3(2, 0, 0)) - Point3(1, 1, 1)).norm() < 1e-15);
  CHECK((apply_rigid_inverse(xi, Point3(1, 1, 1)) - Point3(2, 0, 0)).norm() < 1e-15);
}

TEST_CASE("apply_rigid matches homogeneous composition and round-trips") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    const Mat3 r = random_rotation(rng);
    const Point3 v = random_point(rng);
    const Vec3 t = random_point(rng);
    const Point3 p = random_point(rng, -3, 3);
    const auto xi = AnchoredRigid::make(r, v, t);
    const Point3 q = apply_rigid(xi, p);
    CHECK((q - homogeneous_apply(r, v, t, p)).norm() < 1e-12);
    CHECK((apply_rigid_inverse(xi, q) - p).norm() < 1e-12 * std::max(1.0, p.norm()));
  }
}

TEST_CASE("rotation validation repairs small drift and rejects the rest") {
  Mat3 r = testing::rot_z(0.3);
  CHECK(is_rotation(r));
  Mat3 drift = r;
  drift(0, 0) += 1e-8;
  CHECK_FALSE(is_rotation(drift));
  CHECK(is_rotation(validated_rotation(drift)));
  Mat3 bad = r;
  bad(0, 0) += 1e-3;
  CHECK_THROWS_AS(validated_rotation(bad), InvalidRotation);
  CHECK_THROWS_AS(validated_rotation(-Mat3::Identity()), InvalidRotation);
}

TEST_CASE("knn basic cases") {
  CHECK_THROWS_AS(KnnIndex(std::vector<Point3>{}), EmptyPointSet);
  KnnIndex single({Point3(1, 1, 1)});
  CHECK(single.size() == 1);

  KnnIndex idx({Point3(0, 0, 0), Point3(1, 0, 0), Point3(3, 0, 0)});
  const auto r = idx.query(Point3(0.9, 0, 0), 2);
  REQUIRE(r.size() == 2);
  CHECK(r[0].index == 1);
  CHECK(r[1].index == 0);
  CHECK(r[0].distance == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(r[1].distance == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(idx.query(Point3(0, 0, 0), 10).size() == 3);
  const auto self = idx.query(Point3(3, 0, 0), 1);
  CHECK(self[0].index == 2);
  CHECK(self[0].distance == 0.0);
}

TEST_CASE("knn duplicates are both returned, lower index first") {
  std::mt19937_64 rng(3);
  auto pts = random_points(rng, 200);
  pts.push_back(pts[17]);
  KnnIndex idx(pts);
  const auto r = idx.query(pts[17], 2);
  CHECK(r[0].index == 17);
  CHECK(r[1].index == 200);
  CHECK(r[1].distance == 0.0);
}

TEST_CASE("knn equals brute force") {
  std::mt19937_64 rng(11);
  for (std::size_t n : {10u, 63u, 64u, 1000u}) {
    const auto pts = random_points(rng, n);
    KnnIndex idx(pts);
    for (int q = 0; q < 100; ++q) {
      const Point3 p = random_point(rng, -1.2, 1.2);
      for (std::size_t k : {1u, 5u, 20u}) {
        const auto got = idx.query(p, k);
        const auto want = brute_knn(pts, p, k);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
          CHECK(got[i].index == want[i].index);
          CHECK(got[i].distance == want[i].distance);
        }
      }
    }
  }
}

TEST_CASE("knn ties on a lattice resolve by index") {
  std::vector<Point3> pts;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j)
      for (int k = 0; k < 10; ++k) pts.emplace_back(i, j, k);
  KnnIndex idx(pts);
  for (const Point3& q : {Point3(4.5, 4.5, 4.5), Point3(0, 0, 0), Point3(5, 5, 5.5)}) {
    const auto got = idx.query(q, 20);
    const auto want = brute_knn(pts, q, 20);
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i].index == want[i].index);
  }
}

TEST_CASE("radius query") {
  std::mt19937_64 rng(5);
  const auto pts = random_points(rng, 500);
  KnnIndex idx(pts);
  const Point3 q(0.1, 0.2, -0.1);
  const auto got = idx.radius_query(q, 0.3);
  std::size_t expect = 0;
  for (const auto& p : pts) expect += (p - q).norm() <= 0.3;
  CHECK(got.size() == expect);
  for (std::size_t i = 1; i < got.size(); ++i) CHECK(got[i - 1].distance <= got[i].distance);
}

TEST_CASE("surface distance") {
  std::vector<Point3> grid;
  for (int i = 0; i <= 100; ++i)
    for (int j = 0; j <= 100; ++j) grid.emplace_back(i * 0.01, j * 0.01, 0.0);
  KnnIndex idx(grid);
  CHECK(surface_distance(idx, grid[345]) == 0.0);
  const double d = surface_distance(idx, Point3(0.503, 0.497, 1.0));
  CHECK(d >= 1.0);
  CHECK(d <= 1.01);

  std::mt19937_64 rng(2);
  for (int i = 0; i < 50; ++i) {
    const Point3 p = random_point(rng, -0.5, 1.5);
    double best = INFINITY;
    for (const auto& g : grid) best = std::min(best, (g - p).norm());
    CHECK(surface_distance(idx, p) == best);
  }
}

TEST_CASE("point-to-triangle distance on a box") {
  const auto box = testing::box_mesh(Point3(0, 0, 0), Point3(1, 1, 1));
  KnnIndex idx(box.vertices());
  CHECK(surface_distance_to_triangles(box, idx, Point3(0.5, 0.5, 1.25)) == doctest::Approx(0.25));
  CHECK(surface_distance_to_triangles(box, idx, Point3(0.5, 0.5, 0.5)) == doctest::Approx(0.5));
  CHECK(surface_distance_to_triangles(box, idx, Point3(2, 2, 2)) == doctest::Approx(std::sqrt(3.0)));
}

TEST_CASE("mesh validation") {
  std::vector<Point3> v = {Point3(0, 0, 0), Point3(1, 0, 0), Point3(0, 1, 0)};
  CHECK_NOTHROW(TriMesh(v, {{0, 1, 2}}));
  CHECK_THROWS_AS(TriMesh(v, {{0, 1, 3}}), InvalidInput);
  CHECK_THROWS_AS(TriMesh(v, {{0, 1, 1}}), InvalidInput);
  CHECK_THROWS_AS(TriMesh(v, {{0, -1, 2}}), InvalidInput);
  v[1].x() = NAN;
  CHECK_THROWS_AS(TriMesh(v, {{0, 1, 2}}), InvalidInput);
}

TEST_CASE("mesh edges, components, volume") {
  const auto box = testing::box_mesh(Point3(0, 0, 0), Point3(1, 2, 3));
  const auto edges = box.unique_edges();
  CHECK(edges.size() == 18);
  std::set<Edge> unique(edges.begin(), edges.end());
  CHECK(unique.size() == edges.size());
  CHECK(box.signed_volume() == doctest::Approx(6.0));
  std::size_t count = 0;
  box.component_labels(&count);
  CHECK(count == 1);
}

TEST_CASE("marching cubes on a sphere") {
  const double radius = 0.4;
  const auto grid = testing::sphere_grid(64, radius);
  const auto mesh = marching_cubes(grid, 0.0);
  const double diag = grid.voxel_size * std::sqrt(3.0);
  for (const auto& v : mesh.vertices()) {
    CHECK(std::abs((v - Point3(0.5, 0.5, 0.5)).norm() - radius) <= diag);
  }
  const long chi = static_cast<long>(mesh.vertex_count()) -
                   static_cast<long>(mesh.unique_edges().size()) +
                   static_cast<long>(mesh.face_count());
  CHECK(chi == 2);
  CHECK(mesh.signed_volume() > 0.0);
  CHECK(mesh.signed_volume() == doctest::Approx(4.0 / 3.0 * M_PI * std::pow(radius, 3)).epsilon(0.02));

  // every undirected edge is shared by exactly two faces with opposite direction
  std::map<std::pair<int, int>, int> directed;
  for (const auto& f : mesh.faces())
    for (int e = 0; e < 3; ++e) ++directed[{f[e], f[(e + 1) % 3]}];
  for (const auto& [e, n] : directed) {
    CHECK(n == 1);
    CHECK(directed.count({e.second, e.first}) == 1);
  }
}

TEST_CASE("marching cubes inside-is-lower flips orientation") {
  auto grid = testing::sphere_grid(24, 0.3);
  for (double& v : grid.values) v = -v;
  MarchingCubesOptions opts;
  opts.inside_is_higher = false;
  CHECK(marching_cubes(grid, 0.0, opts).signed_volume() > 0.0);
}

TEST_CASE("marching cubes converges with resolution") {
  std::size_t last_count = 0;
  double last_error = INFINITY;
  for (std::uint32_t n : {32u, 64u, 128u}) {
    const auto mesh = testing::sphere_mesh(n, 0.4);
    double err = 0.0;
    for (const auto& v : mesh.vertices()) err = std::max(err, std::abs((v - Point3(0.5, 0.5, 0.5)).norm() - 0.4));
    CHECK(mesh.vertex_count() > last_count);
    CHECK(err < last_error);
    last_count = mesh.vertex_count();
    last_error = err;
  }
}

TEST_CASE("marching cubes rejects empty and invalid grids") {
  ScalarGrid g;
  g.resolution = {4, 4, 4};
  g.values.assign(64, 1.0);
  CHECK_THROWS_AS(marching_cubes(g, 0.0), EmptyIsosurface);
  g.voxel_size = 0.0;
  CHECK_THROWS_AS(marching_cubes(g, 0.0), InvalidInput);
}

TEST_CASE("obj and ply round trip") {
  const auto mesh = testing::sphere_mesh(20, 0.3);
  std::stringstream obj;
  write_obj(obj, mesh);
  const auto back = read_obj(obj);
  CHECK(back.vertices() == mesh.vertices());
  CHECK(back.faces() == mesh.faces());

  std::stringstream ply;
  write_ply(ply, mesh);
  const auto back_ply = read_ply(ply);
  REQUIRE(back_ply.vertex_count() == mesh.vertex_count());
  CHECK(back_ply.faces() == mesh.faces());
  for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
    CHECK((back_ply.vertices()[i] - mesh.vertices()[i]).norm() < 1e-6);
  }
}

TEST_CASE("obj parsing errors name the line") {
  std::stringstream in("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 x\n");
  try {
    read_obj(in, "bad.obj");
    FAIL("expected a parse error");
  } catch (const InvalidInput& e) {
    CHECK(std::string(e.what()).find("bad.obj:4") != std::string::npos);
  }
}

TEST_CASE("grid round trip") {
  auto g = testing::sphere_grid(9, 0.3);
  g.origin = Point3(-1, 2, 0.5);
  std::stringstream s;
  write_grid(s, g);
  CHECK(s.str().size() == 64 + 4 * g.values.size());
  const auto back = read_grid(s);
  CHECK(back.resolution == g.resolution);
  CHECK(back.origin == g.origin);
  CHECK(back.voxel_size == g.voxel_size);
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    CHECK(back.values[i] == static_cast<double>(static_cast<float>(g.values[i])));
  }
}

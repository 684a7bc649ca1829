#include <doctest.h>

#include <sstream>

#include "dflow/errors.hpp"
#include "dflow/flow/field_io.hpp"
#include "dflow/flow/flow.hpp"
#include "dflow/flow/transform_field.hpp"
#include "dflow/parallel.hpp"
#include "support.hpp"

using namespace dflow;
using testing::random_point;
using testing::random_points;
using testing::random_rotation;

namespace {

TransformField rigid_field(const std::vector<Point3>& anchors, const Mat3& r, const Vec3& t,
                           std::size_t k, double gate = kDefaultSurfaceGate) {
  // g(p) = R p + t  ->  t_i = g(v_i) - v_i
  std::vector<Mat3> rots(anchors.size(), r);
  std::vector<Vec3> trans(anchors.size());
  for (std::size_t i = 0; i < anchors.size(); ++i) trans[i] = r * anchors[i] + t - anchors[i];
  return TransformField(anchors, rots, trans, k, gate);
}

// Literal evaluation of the blend over the K nearest anchors, sorted by brute force.
Point3 reference_forward(const TransformField& f, const Point3& p) {
  std::vector<std::pair<double, std::size_t>> d;
  for (std::size_t i = 0; i < f.size(); ++i) d.emplace_back((f.anchors()[i] - p).norm(), i);
  std::sort(d.begin(), d.end());
  d.resize(std::min(f.k(), d.size()));
  std::vector<double> w(d.size());
  double dmax = d.back().first, total = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) total += w[i] = d.size() == 1 ? 1.0 : 1.0 - d[i].first / dmax;
  Point3 out = Point3::Zero();
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto j = d[i].second;
    const Point3 xi = f.rotations()[j] * (p - f.anchors()[j]) + f.anchors()[j] + f.translations()[j];
    out += (w[i] / total) * xi;
  }
  return out;
}

}  // namespace

TEST_CASE("blend weights hand values") {
  auto w = blend_weights(std::vector<double>{1, 2, 4});
  CHECK(w[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(w[1] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(w[2] == 0.0);
  w = blend_weights(std::vector<double>{0, 3, 5});
  CHECK(w[0] == doctest::Approx(5.0 / 7.0).epsilon(1e-15));
  CHECK(w[1] == doctest::Approx(2.0 / 7.0).epsilon(1e-15));
  CHECK(w[2] == 0.0);
  w = blend_weights(std::vector<double>{2, 2, 2});
  for (double x : w) CHECK(x == doctest::Approx(1.0 / 3.0));
  w = blend_weights(std::vector<double>{0.7});
  CHECK(w[0] == 1.0);
}

TEST_CASE("blend weights partition of unity") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> d(1 + t % 20);
    for (double& x : d) x = u(rng);
    std::sort(d.begin(), d.end());
    const auto w = blend_weights(d);
    double s = 0;
    for (double x : w) {
      CHECK(x >= 0.0);
      s += x;
    }
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
}

TEST_CASE("transform field construction checks") {
  std::vector<Point3> a = {Point3(0, 0, 0), Point3(1, 0, 0)};
  CHECK_THROWS_AS(TransformField(a, {Mat3::Identity()}, {Vec3::Zero(), Vec3::Zero()}), InvalidInput);
  CHECK_THROWS_AS(TransformField(a, {Mat3::Identity(), 2.0 * Mat3::Identity()}, {Vec3::Zero(), Vec3::Zero()}),
                  InvalidRotation);
  CHECK_THROWS_AS(TransformField::identity(a, 0), InvalidInput);
  CHECK_THROWS_AS(TransformField::identity({}), EmptyPointSet);
}

TEST_CASE("identity field leaves points unchanged") {
  std::mt19937_64 rng(2);
  const auto anchors = random_points(rng, 300);
  const auto f = TransformField::identity(anchors);
  for (int i = 0; i < 100; ++i) {
    const Point3 p = random_point(rng, -2, 2);
    CHECK(forward_flow(f, p) == p);
    CHECK(backward_flow(f, p) == p);
  }
}

TEST_CASE("global rigid field reproduces the motion for any K") {
  std::mt19937_64 rng(3);
  const auto anchors = random_points(rng, 200);
  for (std::size_t k : {1u, 2u, 5u, 20u}) {
    const Mat3 r = random_rotation(rng);
    const Vec3 t = random_point(rng);
    const auto f = rigid_field(anchors, r, t, k);
    for (int i = 0; i < 200; ++i) {
      const Point3 p = random_point(rng, -1.5, 1.5);
      CHECK((forward_flow(f, p) - (r * p + t)).norm() < 1e-10);
      CHECK((backward_flow(f, p) - r.transpose() * (p - t)).norm() < 1e-10);
    }
  }
}

TEST_CASE("forward flow matches literal reference") {
  std::mt19937_64 rng(4);
  const std::vector<Point3> two = {Point3(0, 0, 0), Point3(1, 0, 0), Point3(5, 0, 0)};
  TransformField f(two, {Mat3::Identity(), Mat3::Identity(), Mat3::Identity()},
                   {Vec3(0, 0, 1), Vec3(0, 2, 0), Vec3(9, 9, 9)}, 3);
  // query x=0.5: distances 0.5, 0.5, 4.5 -> weights 8/9 each raw, normalized 1/2
  CHECK((forward_flow(f, Point3(0.5, 0, 0)) - Point3(0.5, 1.0, 0.5)).norm() < 1e-12);

  const auto anchors = random_points(rng, 150);
  std::vector<Mat3> rots;
  std::vector<Vec3> trans;
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    rots.push_back(random_rotation(rng));
    trans.push_back(random_point(rng, -0.2, 0.2));
  }
  TransformField g(anchors, rots, trans, 7);
  for (int i = 0; i < 200; ++i) {
    const Point3 p = random_point(rng);
    CHECK((forward_flow(g, p) - reference_forward(g, p)).norm() < 1e-12);
  }
}

TEST_CASE("farthest neighbour carries no weight") {
  std::mt19937_64 rng(5);
  const auto anchors = random_points(rng, 100);
  std::vector<Mat3> rots;
  std::vector<Vec3> trans;
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    rots.push_back(random_rotation(rng));
    trans.push_back(random_point(rng));
  }
  // Weights depend on the farthest distance, so drop it by hand and compare the
  // K-neighbour flow with the K-1 nearest under the same normalization.
  TransformField f(anchors, rots, trans, 6);
  for (int i = 0; i < 50; ++i) {
    const Point3 p = random_point(rng);
    const auto nb = f.forward_index().query(p, 6);
    std::vector<double> d;
    for (auto n : nb) d.push_back(n.distance);
    const auto w = blend_weights(d);
    CHECK(w.back() == 0.0);
    Point3 partial = Point3::Zero();
    for (std::size_t j = 0; j + 1 < nb.size(); ++j) partial += w[j] * apply_rigid(f.transform(nb[j].index), p);
    CHECK((forward_flow(f, p) - partial).norm() < 1e-12);
  }
}

TEST_CASE("surface gate is strict") {
  const std::vector<Point3> a = {Point3(0, 0, 0), Point3(1, 0, 0)};
  const auto f = TransformField::identity(a, 2, 0.25);
  CHECK(is_near_surface(f, Point3(0, 0, 0), Side::Original));
  CHECK_FALSE(is_near_surface(f, Point3(0, 0, 0.25), Side::Original));
  CHECK(is_near_surface(f, Point3(0, 0, 0.2499), Side::Original));
  CHECK_FALSE(is_near_surface(TransformField::identity(a), Point3(0.5, 1, 0), Side::Transformed));

  TransformField moved(a, {Mat3::Identity(), Mat3::Identity()}, {Vec3(0, 0, 1), Vec3(0, 0, 1)}, 2, 0.25);
  CHECK(is_near_surface(moved, Point3(0, 0, 1), Side::Transformed));
  CHECK_FALSE(is_near_surface(moved, Point3(0, 0, 1), Side::Original));
}

TEST_CASE("warp mesh") {
  const auto mesh = testing::sphere_mesh(16, 0.3);
  const auto id = TransformField::identity(mesh.vertices());
  const auto same = warp_mesh(id, mesh);
  CHECK(same.vertices() == mesh.vertices());
  CHECK(same.faces() == mesh.faces());

  std::mt19937_64 rng(6);
  const Mat3 r = random_rotation(rng);
  const Vec3 t(0.1, -0.2, 0.3);
  const auto moved = warp_mesh(rigid_field(mesh.vertices(), r, t, 20), mesh);
  CHECK(moved.faces() == mesh.faces());
  for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
    CHECK((moved.vertices()[i] - (r * mesh.vertices()[i] + t)).norm() < 1e-10);
  }
}

TEST_CASE("warp results do not depend on thread count") {
  std::mt19937_64 rng(8);
  const auto anchors = random_points(rng, 2000);
  std::vector<Mat3> rots;
  std::vector<Vec3> trans;
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    rots.push_back(random_rotation(rng));
    trans.push_back(random_point(rng, -0.1, 0.1));
  }
  TransformField f(anchors, rots, trans);
  const auto pts = random_points(rng, 5000);
  set_thread_count(1);
  const auto one = warp_points(f, pts, Direction::Backward);
  set_thread_count(8);
  const auto eight = warp_points(f, pts, Direction::Backward);
  set_thread_count(0);
  CHECK(one == eight);
}

TEST_CASE("ray samples") {
  std::vector<Point3> anchors;
  for (int i = 0; i <= 100; ++i) anchors.emplace_back(i * 0.01, 0, 0);
  std::vector<Point3> ray;
  for (int i = 0; i < 10; ++i) ray.emplace_back(0.1 + 0.05 * i, 0, 0);

  auto out = warp_ray_samples(TransformField::identity(anchors), ray);
  for (const auto& s : out) {
    CHECK((s.direction - Vec3(1, 0, 0)).norm() < 1e-15);
    CHECK(s.near_surface);
    CHECK_FALSE(s.direction_copied);
  }

  const Mat3 r = testing::rot_z(M_PI / 2);
  const auto rotated = rigid_field(anchors, r, Vec3::Zero(), 20);
  std::vector<Point3> rray;
  for (const auto& p : ray) rray.push_back(r * p);
  // backward maps B -> A, so samples along +y in B come back along +x in A;
  // run the inverse motion to get +y directions instead
  const auto inverse = rigid_field(anchors, r.transpose(), Vec3::Zero(), 20);
  out = warp_ray_samples(inverse, ray);
  for (const auto& s : out) CHECK((s.direction - Vec3(0, 1, 0)).norm() < 1e-10);
  out = warp_ray_samples(rotated, rray);
  for (const auto& s : out) CHECK((s.direction - Vec3(1, 0, 0)).norm() < 1e-10);

  const std::vector<Point3> pair = {Point3(0.2, 0, 0), Point3(0.5, 0, 0.4)};
  out = warp_ray_samples(TransformField::identity(anchors), pair);
  const Vec3 d = (pair[1] - pair[0]).normalized();
  CHECK((out[0].direction - d).norm() < 1e-15);
  CHECK((out[1].direction - d).norm() < 1e-15);
  CHECK_FALSE(out[1].near_surface);

  CHECK_THROWS_AS(warp_ray_samples(TransformField::identity(anchors), std::vector<Point3>{ray[0]}), InvalidInput);
  CHECK_THROWS_AS(warp_ray_samples(TransformField::identity(anchors), std::vector<Point3>{ray[0], ray[0]}),
                  InvalidInput);
}

TEST_CASE("ray directions copied across collapsed samples") {
  std::vector<Point3> anchors;
  for (int i = 0; i <= 100; ++i) anchors.emplace_back(i * 0.01, 0, 0);
  const auto f = TransformField::identity(anchors);
  // out and back: the middle sample's central difference vanishes
  const std::vector<Point3> ray = {Point3(0.2, 0, 0), Point3(0.3, 0, 0), Point3(0.2, 0, 0)};
  const auto out = warp_ray_samples(f, ray);
  CHECK(out[1].direction_copied);
  CHECK((out[1].direction - Vec3(1, 0, 0)).norm() < 1e-15);
  CHECK_FALSE(out[0].direction_copied);
  CHECK((out[2].direction - Vec3(-1, 0, 0)).norm() < 1e-15);
}

TEST_CASE("dfield round trip is bitwise") {
  std::mt19937_64 rng(9);
  const auto anchors = random_points(rng, 50);
  std::vector<Mat3> rots;
  std::vector<Vec3> trans;
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    rots.push_back(random_rotation(rng));
    trans.push_back(random_point(rng));
  }
  TransformField f(anchors, rots, trans, 9, 1e-3);
  std::stringstream s;
  write_field(s, f);
  const auto back = read_field(s);
  CHECK(back.k() == 9);
  CHECK(back.surface_gate() == 1e-3);
  CHECK(back.anchors() == f.anchors());
  CHECK(back.translations() == f.translations());
  for (std::size_t i = 0; i < rots.size(); ++i) CHECK(back.rotations()[i] == f.rotations()[i]);

  std::stringstream bad("{\"format\":\"dfield\",\"version\":1,\"anchors\":4,\"k\":2,\"tau\":0.1}\nxx");
  CHECK_THROWS_AS(read_field(bad), InvalidInput);
}

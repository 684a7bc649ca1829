#include "dflow/defgraph/decimate.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <queue>

#include "dflow/errors.hpp"

namespace dflow {
namespace {

constexpr double kMinNormalCosine = 0.2;
constexpr std::size_t kMinComponentVertices = 4;

// Symmetric 4x4 error quadric, upper triangle row by row.
struct Quadric {
  double q[10] = {};

  void add_plane(const Vec3& n, double d, double w) {
    q[0] += w * n.x() * n.x();
    q[1] += w * n.x() * n.y();
    q[2] += w * n.x() * n.z();
    q[3] += w * n.x() * d;
    q[4] += w * n.y() * n.y();
    q[5] += w * n.y() * n.z();
    q[6] += w * n.y() * d;
    q[7] += w * n.z() * n.z();
    q[8] += w * n.z() * d;
    q[9] += w * d * d;
  }
  Quadric& operator+=(const Quadric& o) {
    for (int i = 0; i < 10; ++i) q[i] += o.q[i];
    return *this;
  }
  double error(const Point3& p) const {
    const double x = p.x(), y = p.y(), z = p.z();
    return q[0] * x * x + 2 * q[1] * x * y + 2 * q[2] * x * z + 2 * q[3] * x + q[4] * y * y +
           2 * q[5] * y * z + 2 * q[6] * y + q[7] * z * z + 2 * q[8] * z + q[9];
  }
  bool minimizer(Point3& out) const {
    Mat3 a;
    a << q[0], q[1], q[2], q[1], q[4], q[5], q[2], q[5], q[7];
    const Vec3 b(-q[3], -q[6], -q[8]);
    Eigen::FullPivLU<Mat3> lu(a);
    lu.setThreshold(1e-10);
    if (!lu.isInvertible()) return false;
    out = lu.solve(b);
    return out.allFinite();
  }
};

struct Candidate {
  double cost;
  std::int32_t u;
  std::int32_t v;
  std::uint32_t stamp_u;
  std::uint32_t stamp_v;
  Point3 target;
};

struct CandidateOrder {
  bool operator()(const Candidate& a, const Candidate& b) const {
    if (a.cost != b.cost) return a.cost > b.cost;
    if (a.u != b.u) return a.u > b.u;
    return a.v > b.v;
  }
};

class EdgeCollapser {
 public:
  explicit EdgeCollapser(const TriMesh& mesh)
      : pos_(mesh.vertices()),
        faces_(mesh.faces()),
        face_alive_(faces_.size(), 1),
        vertex_faces_(pos_.size()),
        quadric_(pos_.size()),
        alive_(pos_.size(), 1),
        stamp_(pos_.size(), 0) {
    std::size_t components = 0;
    component_ = mesh.component_labels(&components);
    component_size_.assign(components, 0);
    for (auto c : component_) ++component_size_[c];
    for (std::size_t f = 0; f < faces_.size(); ++f) {
      for (auto v : faces_[f]) vertex_faces_[v].push_back(static_cast<std::int32_t>(f));
      const Point3& a = pos_[faces_[f][0]];
      const Vec3 n = (pos_[faces_[f][1]] - a).cross(pos_[faces_[f][2]] - a);
      const double len = n.norm();
      if (len <= 0.0) continue;
      const Vec3 unit = n / len;
      for (auto v : faces_[f]) quadric_[v].add_plane(unit, -unit.dot(a), 1.0);
    }
    add_boundary_planes();
    remaining_ = pos_.size();
  }

  TriMesh run(std::size_t target) {
    for (const auto& [a, b] : unique_edges()) push(a, b);
    while (remaining_ > target && !heap_.empty()) {
      const Candidate c = heap_.top();
      heap_.pop();
      if (!alive_[c.u] || !alive_[c.v]) continue;
      if (stamp_[c.u] != c.stamp_u || stamp_[c.v] != c.stamp_v) continue;
      if (component_size_[component_[c.u]] <= kMinComponentVertices) continue;
      if (!can_collapse(c.u, c.v, c.target)) continue;
      collapse(c.u, c.v, c.target);
    }
    return compact();
  }

 private:
  std::vector<Edge> unique_edges() const {
    std::vector<Edge> edges;
    for (std::size_t f = 0; f < faces_.size(); ++f) {
      if (!face_alive_[f]) continue;
      for (int c = 0; c < 3; ++c) {
        auto a = faces_[f][c], b = faces_[f][(c + 1) % 3];
        if (a > b) std::swap(a, b);
        edges.emplace_back(a, b);
      }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
  }

  void add_boundary_planes() {
    // Edges used by exactly one face get a perpendicular constraint plane so
    // open borders do not shrink.
    std::vector<std::pair<Edge, std::int32_t>> directed;
    for (std::size_t f = 0; f < faces_.size(); ++f) {
      for (int c = 0; c < 3; ++c) {
        auto a = faces_[f][c], b = faces_[f][(c + 1) % 3];
        directed.push_back({{std::min(a, b), std::max(a, b)}, static_cast<std::int32_t>(f)});
      }
    }
    std::sort(directed.begin(), directed.end());
    for (std::size_t i = 0; i < directed.size();) {
      std::size_t j = i;
      while (j < directed.size() && directed[j].first == directed[i].first) ++j;
      if (j - i == 1) {
        const auto [a, b] = directed[i].first;
        const Face& f = faces_[directed[i].second];
        const Vec3 n = (pos_[f[1]] - pos_[f[0]]).cross(pos_[f[2]] - pos_[f[0]]);
        const Vec3 e = pos_[b] - pos_[a];
        Vec3 side = n.cross(e);
        const double len = side.norm();
        if (len > 0.0) {
          side /= len;
          boundary_.push_back(a);
          boundary_.push_back(b);
          for (auto v : {a, b}) quadric_[v].add_plane(side, -side.dot(pos_[a]), 10.0);
        }
      }
      i = j;
    }
    std::sort(boundary_.begin(), boundary_.end());
    boundary_.erase(std::unique(boundary_.begin(), boundary_.end()), boundary_.end());
  }

  bool is_boundary(std::int32_t v) const {
    return std::binary_search(boundary_.begin(), boundary_.end(), v);
  }

  std::vector<std::int32_t> neighbors(std::int32_t v) const {
    std::vector<std::int32_t> out;
    for (auto f : vertex_faces_[v]) {
      if (!face_alive_[f]) continue;
      for (auto w : faces_[f]) {
        if (w != v) out.push_back(w);
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  void push(std::int32_t a, std::int32_t b) {
    if (a > b) std::swap(a, b);
    Quadric q = quadric_[a];
    q += quadric_[b];
    const Point3 mid = 0.5 * (pos_[a] + pos_[b]);
    const double len2 = (pos_[a] - pos_[b]).squaredNorm();
    Point3 best = mid;
    double best_err = q.error(mid);
    Point3 opt;
    if (q.minimizer(opt) && (opt - mid).squaredNorm() <= len2) {
      best = opt;
      best_err = q.error(opt);
    } else {
      for (const Point3& p : {pos_[a], pos_[b]}) {
        const double e = q.error(p);
        if (e < best_err) {
          best_err = e;
          best = p;
        }
      }
    }
    const double cost = std::max(0.0, best_err) + len2;
    heap_.push({cost, a, b, stamp_[a], stamp_[b], best});
  }

  bool can_collapse(std::int32_t u, std::int32_t v, const Point3& target) const {
    const auto nu = neighbors(u);
    const auto nv = neighbors(v);
    std::vector<std::int32_t> common;
    std::set_intersection(nu.begin(), nu.end(), nv.begin(), nv.end(), std::back_inserter(common));

    std::vector<std::int32_t> opposite;
    for (auto f : vertex_faces_[u]) {
      if (!face_alive_[f]) continue;
      const Face& face = faces_[f];
      if (std::find(face.begin(), face.end(), v) == face.end()) continue;
      for (auto w : face) {
        if (w != u && w != v) opposite.push_back(w);
      }
    }
    std::sort(opposite.begin(), opposite.end());
    if (opposite.empty() || opposite != common) return false;
    if (opposite.size() == 2 && is_boundary(u) && is_boundary(v)) return false;

    for (auto w : {u, v}) {
      for (auto f : vertex_faces_[w]) {
        if (!face_alive_[f]) continue;
        Face face = faces_[f];
        const bool has_u = std::find(face.begin(), face.end(), u) != face.end();
        const bool has_v = std::find(face.begin(), face.end(), v) != face.end();
        if (has_u && has_v) continue;
        const Vec3 before = normal(face, -1, target);
        for (int c = 0; c < 3; ++c) {
          if (face[c] == w) face[c] = -1;
        }
        const Vec3 after = normal(face, -1, target);
        const double nb = before.norm();
        const double na = after.norm();
        if (na <= 1e-14 * std::max(1.0, nb)) return false;
        if (nb > 0.0 && before.dot(after) < kMinNormalCosine * nb * na) return false;
      }
    }
    return true;
  }

  Vec3 normal(const Face& face, std::int32_t placeholder, const Point3& target) const {
    auto at = [&](std::int32_t i) -> const Point3& { return i == placeholder ? target : pos_[i]; };
    return (at(face[1]) - at(face[0])).cross(at(face[2]) - at(face[0]));
  }

  void collapse(std::int32_t u, std::int32_t v, const Point3& target) {
    for (auto f : vertex_faces_[v]) {
      if (!face_alive_[f]) continue;
      Face& face = faces_[f];
      if (std::find(face.begin(), face.end(), u) != face.end()) {
        face_alive_[f] = 0;
        continue;
      }
      for (auto& w : face) {
        if (w == v) w = u;
      }
      vertex_faces_[u].push_back(f);
    }
    vertex_faces_[v].clear();
    auto& fu = vertex_faces_[u];
    fu.erase(std::remove_if(fu.begin(), fu.end(), [&](std::int32_t f) { return !face_alive_[f]; }),
             fu.end());
    std::sort(fu.begin(), fu.end());
    fu.erase(std::unique(fu.begin(), fu.end()), fu.end());

    if (is_boundary(v) && !is_boundary(u)) {
      boundary_.insert(std::upper_bound(boundary_.begin(), boundary_.end(), u), u);
    }
    pos_[u] = target;
    quadric_[u] += quadric_[v];
    alive_[v] = 0;
    ++stamp_[u];
    ++stamp_[v];
    --component_size_[component_[u]];
    --remaining_;
    for (auto w : neighbors(u)) push(u, w);
  }

  TriMesh compact() const {
    std::vector<std::int32_t> remap(pos_.size(), -1);
    std::vector<Point3> vertices;
    vertices.reserve(remaining_);
    for (std::size_t v = 0; v < pos_.size(); ++v) {
      if (!alive_[v]) continue;
      remap[v] = static_cast<std::int32_t>(vertices.size());
      vertices.push_back(pos_[v]);
    }
    std::vector<Face> faces;
    for (std::size_t f = 0; f < faces_.size(); ++f) {
      if (!face_alive_[f]) continue;
      faces.push_back({remap[faces_[f][0]], remap[faces_[f][1]], remap[faces_[f][2]]});
    }
    return TriMesh(std::move(vertices), std::move(faces));
  }

  std::vector<Point3> pos_;
  std::vector<Face> faces_;
  std::vector<char> face_alive_;
  std::vector<std::vector<std::int32_t>> vertex_faces_;
  std::vector<Quadric> quadric_;
  std::vector<char> alive_;
  std::vector<std::uint32_t> stamp_;
  std::vector<std::int32_t> component_;
  std::vector<std::size_t> component_size_;
  std::vector<std::int32_t> boundary_;
  std::size_t remaining_ = 0;
  std::priority_queue<Candidate, std::vector<Candidate>, CandidateOrder> heap_;
};

}  // namespace

TriMesh decimate(const TriMesh& mesh, std::size_t target_vertices) {
  if (target_vertices == 0) throw InvalidInput("decimation target must be positive");
  if (target_vertices > mesh.vertex_count()) {
    throw TargetTooLarge(target_vertices, mesh.vertex_count());
  }
  if (target_vertices == mesh.vertex_count()) return mesh;
  return EdgeCollapser(mesh).run(target_vertices);
}

}  // namespace dflow

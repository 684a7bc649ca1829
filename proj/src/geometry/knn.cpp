#include "dflow/geometry/knn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dflow/errors.hpp"
#include "dflow/geometry/mesh.hpp"

namespace dflow {
namespace {

struct Candidate {
  double d2;
  std::uint32_t index;
};

inline bool closer(const Candidate& a, const Candidate& b) {
  return a.d2 < b.d2 || (a.d2 == b.d2 && a.index < b.index);
}

double box_distance2(const Point3& p, const Point3& lo, const Point3& hi) {
  double d2 = 0.0;
  for (int a = 0; a < 3; ++a) {
    double d = 0.0;
    if (p[a] < lo[a]) d = lo[a] - p[a];
    else if (p[a] > hi[a]) d = p[a] - hi[a];
    d2 += d * d;
  }
  return d2;
}

// Bounded max-heap of the k best candidates under `closer`.
class BestK {
 public:
  BestK(std::size_t k, std::vector<Candidate>& storage) : k_(k), heap_(storage) { heap_.clear(); }

  bool full() const { return heap_.size() == k_; }
  double worst() const { return heap_.front().d2; }

  void offer(const Candidate& c) {
    if (!full()) {
      heap_.push_back(c);
      std::push_heap(heap_.begin(), heap_.end(), closer);
    } else if (closer(c, heap_.front())) {
      std::pop_heap(heap_.begin(), heap_.end(), closer);
      heap_.back() = c;
      std::push_heap(heap_.begin(), heap_.end(), closer);
    }
  }

 private:
  std::size_t k_;
  std::vector<Candidate>& heap_;
};

}  // namespace

KnnIndex::KnnIndex(std::vector<Point3> points) : points_(std::move(points)) {
  if (points_.empty()) throw EmptyPointSet();
  for (const auto& p : points_) {
    if (!p.allFinite()) throw InvalidInput("KNN point has non-finite coordinates");
  }
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  if (points_.size() >= kBruteForceBelow) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 1);
    build(0, static_cast<std::uint32_t>(points_.size()));
  }
}

std::int32_t KnnIndex::build(std::uint32_t begin, std::uint32_t end) {
  Node node;
  node.begin = begin;
  node.end = end;
  node.lo = Point3::Constant(std::numeric_limits<double>::infinity());
  node.hi = -node.lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    node.lo = node.lo.cwiseMin(points_[order_[i]]);
    node.hi = node.hi.cwiseMax(points_[order_[i]]);
  }
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= kLeafSize) return id;

  int axis = 0;
  (node.hi - node.lo).maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double pa = points_[a][axis];
                     const double pb = points_[b][axis];
                     return pa < pb || (pa == pb && a < b);
                   });
  const auto left = build(begin, mid);
  const auto right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KnnIndex::query(const Point3& p, std::size_t k, std::vector<Neighbor>& out) const {
  out.clear();
  if (k == 0) return;
  k = std::min(k, points_.size());
  thread_local std::vector<Candidate> storage;
  BestK best(k, storage);

  if (nodes_.empty()) {
    for (std::uint32_t i = 0; i < points_.size(); ++i) {
      best.offer({(points_[i] - p).squaredNorm(), i});
    }
  } else {
    thread_local std::vector<std::pair<double, std::int32_t>> stack;
    stack.clear();
    stack.emplace_back(box_distance2(p, nodes_[0].lo, nodes_[0].hi), 0);
    while (!stack.empty()) {
      const auto [bound, id] = stack.back();
      stack.pop_back();
      if (best.full() && bound > best.worst()) continue;
      const Node& node = nodes_[id];
      if (node.left < 0) {
        for (std::uint32_t i = node.begin; i < node.end; ++i) {
          const auto idx = order_[i];
          best.offer({(points_[idx] - p).squaredNorm(), idx});
        }
        continue;
      }
      const double dl = box_distance2(p, nodes_[node.left].lo, nodes_[node.left].hi);
      const double dr = box_distance2(p, nodes_[node.right].lo, nodes_[node.right].hi);
      // Push the farther child first so the nearer one is explored next.
      if (dl <= dr) {
        stack.emplace_back(dr, node.right);
        stack.emplace_back(dl, node.left);
      } else {
        stack.emplace_back(dl, node.left);
        stack.emplace_back(dr, node.right);
      }
    }
  }

  std::sort(storage.begin(), storage.end(), closer);
  out.reserve(storage.size());
  for (const auto& c : storage) out.push_back({c.index, std::sqrt(c.d2)});
}

std::vector<Neighbor> KnnIndex::query(const Point3& p, std::size_t k) const {
  std::vector<Neighbor> out;
  query(p, k, out);
  return out;
}

Neighbor KnnIndex::nearest(const Point3& p) const {
  std::vector<Neighbor> out;
  query(p, 1, out);
  return out.front();
}

std::vector<Neighbor> KnnIndex::radius_query(const Point3& p, double radius) const {
  std::vector<Candidate> found;
  const double r2 = radius * radius;
  if (nodes_.empty()) {
    for (std::uint32_t i = 0; i < points_.size(); ++i) {
      const double d2 = (points_[i] - p).squaredNorm();
      if (d2 <= r2) found.push_back({d2, i});
    }
  } else {
    std::vector<std::int32_t> stack{0};
    while (!stack.empty()) {
      const auto id = stack.back();
      stack.pop_back();
      const Node& node = nodes_[id];
      if (box_distance2(p, node.lo, node.hi) > r2) continue;
      if (node.left < 0) {
        for (std::uint32_t i = node.begin; i < node.end; ++i) {
          const auto idx = order_[i];
          const double d2 = (points_[idx] - p).squaredNorm();
          if (d2 <= r2) found.push_back({d2, idx});
        }
      } else {
        stack.push_back(node.left);
        stack.push_back(node.right);
      }
    }
  }
  std::sort(found.begin(), found.end(), closer);
  std::vector<Neighbor> out;
  out.reserve(found.size());
  for (const auto& c : found) out.push_back({c.index, std::sqrt(c.d2)});
  return out;
}

double surface_distance(const KnnIndex& vertex_index, const Point3& p) {
  return vertex_index.nearest(p).distance;
}

Point3 closest_point_on_triangle(const Point3& p, const Point3& a, const Point3& b,
                                 const Point3& c) {
  // Region classification over the triangle's Voronoi regions.
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + ab * (d1 / (d1 - d3));

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + ac * (d2 / (d2 - d6));

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
  }
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

double surface_distance_to_triangles(const TriMesh& mesh, const KnnIndex& vertex_index,
                                     const Point3& p) {
  const auto& verts = mesh.vertices();
  const auto& faces = mesh.faces();
  if (faces.empty()) return surface_distance(vertex_index, p);

  double longest = 0.0;
  for (const auto& f : faces) {
    for (int c = 0; c < 3; ++c) {
      longest = std::max(longest, (verts[f[c]] - verts[f[(c + 1) % 3]]).norm());
    }
  }
  const double nearest_vertex = surface_distance(vertex_index, p);
  const auto candidates = vertex_index.radius_query(p, nearest_vertex + longest);
  std::vector<char> mark(verts.size(), 0);
  for (const auto& n : candidates) mark[n.index] = 1;

  double best = nearest_vertex;
  for (const auto& f : faces) {
    if (!mark[f[0]] && !mark[f[1]] && !mark[f[2]]) continue;
    const Point3 q = closest_point_on_triangle(p, verts[f[0]], verts[f[1]], verts[f[2]]);
    best = std::min(best, (q - p).norm());
  }
  return best;
}

}  // namespace dflow

namespace dflow {

TriangleSurface::TriangleSurface(TriMesh mesh)
    : mesh_(std::make_shared<const TriMesh>(std::move(mesh))),
      index_(mesh_->vertices()),
      vertex_faces_(mesh_->vertex_count()) {
  const auto& verts = mesh_->vertices();
  const auto& faces = mesh_->faces();
  for (std::uint32_t f = 0; f < faces.size(); ++f) {
    for (int c = 0; c < 3; ++c) {
      vertex_faces_[faces[f][c]].push_back(f);
      longest_edge_ = std::max(longest_edge_, (verts[faces[f][c]] - verts[faces[f][(c + 1) % 3]]).norm());
    }
  }
}

const TriMesh& TriangleSurface::mesh() const { return *mesh_; }

// Smallest point-to-surface distance, exact whenever it is below `bound`.
double TriangleSurface::distance_below(const Point3& p, double bound) const {
  const auto& verts = mesh_->vertices();
  const auto& faces = mesh_->faces();
  double best = surface_distance(index_, p);
  if (faces.empty()) return best;
  // a triangle within `bound` of p has every vertex within bound + longest edge
  const double reach = std::min(best, bound) + longest_edge_;
  std::vector<std::uint32_t> seen;
  for (const auto& n : index_.radius_query(p, reach)) {
    for (std::uint32_t f : vertex_faces_[n.index]) seen.push_back(f);
  }
  std::sort(seen.begin(), seen.end());
  seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
  for (std::uint32_t f : seen) {
    const Point3 q = closest_point_on_triangle(p, verts[faces[f][0]], verts[faces[f][1]], verts[faces[f][2]]);
    best = std::min(best, (q - p).norm());
  }
  return best;
}

double TriangleSurface::distance(const Point3& p) const {
  return distance_below(p, std::numeric_limits<double>::infinity());
}

bool TriangleSurface::within(const Point3& p, double tau) const {
  if (surface_distance(index_, p) < tau) return true;
  return distance_below(p, tau) < tau;
}

}  // namespace dflow

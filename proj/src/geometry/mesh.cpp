#include "dflow/geometry/mesh.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "dflow/errors.hpp"

namespace dflow {

BoundingBox bounding_box(const std::vector<Point3>& points) {
  BoundingBox box;
  for (const auto& p : points) box.extend(p);
  return box;
}

TriMesh::TriMesh(std::vector<Point3> vertices, std::vector<Face> faces)
    : vertices_(std::move(vertices)), faces_(std::move(faces)) {
  for (const auto& v : vertices_) {
    if (!v.allFinite()) throw InvalidInput("mesh vertex has non-finite coordinates");
  }
  const auto n = static_cast<std::int64_t>(vertices_.size());
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    const Face& face = faces_[f];
    for (auto idx : face) {
      if (idx < 0 || idx >= n) {
        throw InvalidInput("face " + std::to_string(f) + " references vertex " +
                           std::to_string(idx) + " out of range");
      }
    }
    if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2]) {
      throw InvalidInput("face " + std::to_string(f) + " is degenerate");
    }
  }
}

std::vector<Edge> TriMesh::unique_edges() const {
  std::vector<Edge> edges;
  edges.reserve(faces_.size() * 3);
  for (const auto& f : faces_) {
    for (int c = 0; c < 3; ++c) {
      auto a = f[c];
      auto b = f[(c + 1) % 3];
      if (a > b) std::swap(a, b);
      edges.emplace_back(a, b);
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

double TriMesh::average_edge_length() const {
  const auto edges = unique_edges();
  if (edges.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [a, b] : edges) sum += (vertices_[a] - vertices_[b]).norm();
  return sum / static_cast<double>(edges.size());
}

std::vector<std::int32_t> TriMesh::component_labels(std::size_t* count) const {
  std::vector<std::int32_t> parent(vertices_.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::int32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto& f : faces_) {
    for (int c = 0; c < 3; ++c) {
      const auto a = find(f[c]);
      const auto b = find(f[(c + 1) % 3]);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }
  std::vector<std::int32_t> label(vertices_.size(), -1);
  std::vector<std::int32_t> root_label(vertices_.size(), -1);
  std::int32_t next = 0;
  for (std::size_t v = 0; v < vertices_.size(); ++v) {
    const auto r = find(static_cast<std::int32_t>(v));
    if (root_label[r] < 0) root_label[r] = next++;
    label[v] = root_label[r];
  }
  if (count) *count = static_cast<std::size_t>(next);
  return label;
}

double TriMesh::signed_volume() const {
  double vol = 0.0;
  for (const auto& f : faces_) {
    vol += vertices_[f[0]].dot(vertices_[f[1]].cross(vertices_[f[2]]));
  }
  return vol / 6.0;
}

}  // namespace dflow

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "dflow/geometry/rigid.hpp"

namespace dflow {

/// A mesh vertex tied to its observed position in the transformed scene.
struct Anchor {
  std::uint32_t vertex;
  Point3 source;  ///< v^A, the rest position of `vertex`
  Point3 target;  ///< v^B
};

inline constexpr double kAnchorVertexTolerance = 1e-9;

/// Correspondence anchors for the consistency loss. Construction checks every
/// vertex index against the mesh and that each source matches its vertex.
class AnchorSet {
 public:
  AnchorSet() = default;
  AnchorSet(std::vector<Anchor> anchors, const std::vector<Point3>& mesh_vertices);

  const std::vector<Anchor>& items() const { return anchors_; }
  std::size_t size() const { return anchors_.size(); }
  bool empty() const { return anchors_.empty(); }
  auto begin() const { return anchors_.begin(); }
  auto end() const { return anchors_.end(); }

 private:
  std::vector<Anchor> anchors_;
};

/// JSON Lines, one {"vid": int, "va": [3], "vb": [3]} per anchor.
void write_anchors(const std::filesystem::path& path, const std::vector<Anchor>& anchors);
std::vector<Anchor> read_anchors(const std::filesystem::path& path);

}  // namespace dflow

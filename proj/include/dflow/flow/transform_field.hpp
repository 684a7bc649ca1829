#pragma once

#include <cstddef>
#include <vector>

#include "dflow/geometry/knn.hpp"
#include "dflow/geometry/rigid.hpp"

namespace dflow {

inline constexpr std::size_t kDefaultNeighbors = 20;
inline constexpr double kDefaultSurfaceGate = 7e-5;

/// Dense set of anchored rigid transforms, one per full-resolution mesh
/// vertex, with KNN indices over the anchors (forward) and over the
/// transformed anchors v + t (backward).
class TransformField {
 public:
  TransformField(std::vector<Point3> anchors, std::vector<Mat3> rotations,
                 std::vector<Vec3> translations, std::size_t k = kDefaultNeighbors,
                 double surface_gate = kDefaultSurfaceGate);

  static TransformField identity(std::vector<Point3> anchors, std::size_t k = kDefaultNeighbors,
                                 double surface_gate = kDefaultSurfaceGate);

  std::size_t size() const { return anchors_.size(); }
  std::size_t k() const { return k_; }
  double surface_gate() const { return surface_gate_; }
  const std::vector<Point3>& anchors() const { return anchors_; }
  const std::vector<Mat3>& rotations() const { return rotations_; }
  const std::vector<Vec3>& translations() const { return translations_; }
  AnchoredRigid transform(std::size_t i) const {
    return AnchoredRigid{rotations_[i], anchors_[i], translations_[i]};
  }

  const KnnIndex& forward_index() const { return forward_index_; }
  const KnnIndex& backward_index() const { return backward_index_; }

 private:
  std::vector<Point3> anchors_;
  std::vector<Mat3> rotations_;
  std::vector<Vec3> translations_;
  std::size_t k_;
  double surface_gate_;
  KnnIndex forward_index_;
  KnnIndex backward_index_;
};

}  // namespace dflow

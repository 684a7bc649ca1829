#include "dflow/flow/transform_field.hpp"

#include <cmath>
#include <string>

#include "dflow/errors.hpp"

namespace dflow {
namespace {

std::vector<Point3> moved_anchors(const std::vector<Point3>& anchors,
                                  const std::vector<Vec3>& translations) {
  std::vector<Point3> out(anchors.size());
  for (std::size_t i = 0; i < anchors.size(); ++i) out[i] = anchors[i] + translations[i];
  return out;
}

std::vector<Point3> checked(std::vector<Point3> anchors, std::size_t rotations,
                            std::size_t translations) {
  if (anchors.size() != rotations || anchors.size() != translations) {
    throw InvalidInput("transform field needs one rotation and translation per anchor");
  }
  return anchors;
}

}  // namespace

TransformField::TransformField(std::vector<Point3> anchors, std::vector<Mat3> rotations,
                               std::vector<Vec3> translations, std::size_t k, double surface_gate)
    : anchors_(checked(std::move(anchors), rotations.size(), translations.size())),
      rotations_(std::move(rotations)),
      translations_(std::move(translations)),
      k_(k),
      surface_gate_(surface_gate),
      forward_index_(anchors_),
      backward_index_(moved_anchors(anchors_, translations_)) {
  if (k_ < 1) throw InvalidInput("transform field neighbour count must be >= 1");
  if (!(surface_gate_ >= 0.0)) throw InvalidInput("surface gate must be non-negative");
  for (std::size_t i = 0; i < rotations_.size(); ++i) {
    rotations_[i] = validated_rotation(rotations_[i]);
    if (!translations_[i].allFinite()) {
      throw InvalidInput("translation " + std::to_string(i) + " is not finite");
    }
  }
}

TransformField TransformField::identity(std::vector<Point3> anchors, std::size_t k,
                                        double surface_gate) {
  const auto n = anchors.size();
  return TransformField(std::move(anchors), std::vector<Mat3>(n, Mat3::Identity()),
                        std::vector<Vec3>(n, Vec3::Zero()), k, surface_gate);
}

}  // namespace dflow

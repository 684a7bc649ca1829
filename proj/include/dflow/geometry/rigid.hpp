#pragma once

#include <Eigen/Dense>

namespace dflow {

using Point3 = Eigen::Vector3d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Tolerance on ||R^T R - I||_F for a matrix to count as a rotation.
inline constexpr double kRotationTolerance = 1e-9;
/// Matrices within this distance of SO(3) are projected onto it by the
/// constructors; anything farther is rejected.
inline constexpr double kRotationRepairTolerance = 1e-6;

bool is_rotation(const Mat3& r, double tolerance = kRotationTolerance);

/// Nearest rotation in the Frobenius sense (polar decomposition).
Mat3 project_to_rotation(const Mat3& r);

/// Returns `r` unchanged if it is a rotation, its polar projection if it is
/// close, and throws InvalidRotation otherwise.
Mat3 validated_rotation(const Mat3& r);

/// A rigid motion that rotates about an anchor point and then translates:
///   x -> R (x - origin) + origin + translation
struct AnchoredRigid {
  Mat3 rotation = Mat3::Identity();
  Point3 origin = Point3::Zero();
  Vec3 translation = Vec3::Zero();

  static AnchoredRigid identity(const Point3& origin);
  /// Validates (and if needed repairs) the rotation block.
  static AnchoredRigid make(const Mat3& rotation, const Point3& origin, const Vec3& translation);
};

Point3 apply_rigid(const AnchoredRigid& xi, const Point3& p);
Point3 apply_rigid_inverse(const AnchoredRigid& xi, const Point3& p);

Mat3 skew(const Vec3& v);

}  // namespace dflow

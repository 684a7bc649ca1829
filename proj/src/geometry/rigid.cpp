#include "dflow/geometry/rigid.hpp"

#include <Eigen/SVD>
#include <cmath>

#include "dflow/errors.hpp"

namespace dflow {

bool is_rotation(const Mat3& r, double tolerance) {
  if (!r.allFinite()) return false;
  const double ortho = (r.transpose() * r - Mat3::Identity()).norm();
  return ortho <= tolerance && std::abs(r.determinant() - 1.0) <= tolerance;
}

Mat3 project_to_rotation(const Mat3& r) {
  Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  return u * v.transpose();
}

Mat3 validated_rotation(const Mat3& r) {
  if (is_rotation(r)) return r;
  if (is_rotation(r, kRotationRepairTolerance)) return project_to_rotation(r);
  throw InvalidRotation("matrix is not a rotation (||R^T R - I|| = " +
                        std::to_string((r.transpose() * r - Mat3::Identity()).norm()) + ")");
}

AnchoredRigid AnchoredRigid::identity(const Point3& origin) {
  return AnchoredRigid{Mat3::Identity(), origin, Vec3::Zero()};
}

AnchoredRigid AnchoredRigid::make(const Mat3& rotation, const Point3& origin,
                                  const Vec3& translation) {
  if (!origin.allFinite() || !translation.allFinite()) {
    throw InvalidInput("rigid transform has non-finite origin or translation");
  }
  return AnchoredRigid{validated_rotation(rotation), origin, translation};
}

Point3 apply_rigid(const AnchoredRigid& xi, const Point3& p) {
  return xi.rotation * (p - xi.origin) + xi.origin + xi.translation;
}

Point3 apply_rigid_inverse(const AnchoredRigid& xi, const Point3& p) {
  return xi.rotation.transpose() * (p - xi.origin - xi.translation) + xi.origin;
}

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return s;
}

}  // namespace dflow

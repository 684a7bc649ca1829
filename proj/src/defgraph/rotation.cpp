#include "dflow/defgraph/rotation.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <numbers>

namespace dflow {
namespace {
constexpr double kSmallAngle = 1e-6;
}

Mat3 rotation_from_axis_angle(const Vec3& axis_angle) {
  const double theta = axis_angle.norm();
  const Mat3 w = skew(axis_angle);
  if (theta < kSmallAngle) return Mat3::Identity() + w + 0.5 * w * w;
  const double a = std::sin(theta) / theta;
  const double b = (1.0 - std::cos(theta)) / (theta * theta);
  return Mat3::Identity() + a * w + b * w * w;
}

Mat3 right_jacobian(const Vec3& axis_angle) {
  const double theta = axis_angle.norm();
  const Mat3 w = skew(axis_angle);
  if (theta < kSmallAngle) return Mat3::Identity() - 0.5 * w + (1.0 / 6.0) * w * w;
  const double t2 = theta * theta;
  const double a = (1.0 - std::cos(theta)) / t2;
  const double b = (theta - std::sin(theta)) / (t2 * theta);
  return Mat3::Identity() - a * w + b * w * w;
}

Vec3 canonical_axis_angle(const Vec3& axis_angle) {
  constexpr double pi = std::numbers::pi;
  double theta = axis_angle.norm();
  if (theta <= pi || !std::isfinite(theta)) return axis_angle;
  const Vec3 axis = axis_angle / theta;
  theta = std::fmod(theta, 2.0 * pi);
  if (theta > pi) theta -= 2.0 * pi;
  return axis * theta;
}

Vec3 axis_angle_from_rotation(const Mat3& rotation) {
  const Eigen::AngleAxisd aa(rotation);
  return canonical_axis_angle(aa.axis() * aa.angle());
}

}  // namespace dflow

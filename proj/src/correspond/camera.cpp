#include "dflow/correspond/camera.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "dflow/errors.hpp"

namespace dflow {

void Camera::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy)) {
    throw InvalidInput("camera focal lengths must be positive");
  }
  if (!std::isfinite(cx) || !std::isfinite(cy)) throw InvalidInput("camera principal point is not finite");
  if (width == 0 || height == 0) throw InvalidInput("camera image is empty");
  if (!pose.allFinite()) throw InvalidInput("camera pose is not finite");
  if (!is_rotation(rotation(), kRotationRepairTolerance)) {
    throw InvalidInput("camera pose rotation is not orthonormal");
  }
  if (pose.row(3) != Eigen::RowVector4d(0, 0, 0, 1)) throw InvalidInput("camera pose last row must be 0 0 0 1");
}

Point3 unproject(const Camera& cam, double u, double v, double depth) {
  if (!std::isfinite(depth) || depth <= 0.0) {
    throw InvalidDepth("depth " + std::to_string(depth) + " is not positive");
  }
  if (!cam.contains(u, v)) {
    throw InvalidInput("pixel (" + std::to_string(u) + ", " + std::to_string(v) + ") outside the image");
  }
  const Vec3 local(depth * (u - cam.cx) / cam.fx, depth * (v - cam.cy) / cam.fy, depth);
  return cam.rotation() * local + cam.position();
}

Projection project(const Camera& cam, const Point3& world) {
  const Vec3 local = cam.rotation().transpose() * (world - cam.position());
  return {cam.fx * local.x() / local.z() + cam.cx, cam.fy * local.y() / local.z() + cam.cy, local.z()};
}

std::vector<Eigen::Matrix4d> hemisphere_poses(std::size_t count, double radius, const Point3& center,
                                              const std::vector<double>& yaws_deg) {
  if (count == 0) throw InvalidParams("pose count must be at least 1");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidParams("pose radius must be positive");
  if (!center.allFinite()) throw InvalidParams("pose center is not finite");
  if (yaws_deg.empty()) throw InvalidParams("yaw list is empty");

  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<Eigen::Matrix4d> poses;
  poses.reserve(count * yaws_deg.size());
  for (std::size_t i = 0; i < count; ++i) {
    const double z = (static_cast<double>(i) + 0.5) / static_cast<double>(count);
    const double ring = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * static_cast<double>(i);
    const Vec3 offset = radius * Vec3(ring * std::cos(phi), ring * std::sin(phi), z);
    const Point3 eye = center + offset;

    const Vec3 forward = (-offset).normalized();
    const Vec3 right = forward.cross(Vec3::UnitZ()).normalized();
    const Vec3 down = forward.cross(right);
    Mat3 look;
    look.col(0) = right;
    look.col(1) = down;
    look.col(2) = forward;

    for (double yaw : yaws_deg) {
      const double a = yaw * std::numbers::pi / 180.0;
      Mat3 roll = Mat3::Identity();
      roll(0, 0) = std::cos(a);
      roll(0, 1) = -std::sin(a);
      roll(1, 0) = std::sin(a);
      roll(1, 1) = std::cos(a);
      Eigen::Matrix4d pose = Eigen::Matrix4d::Identity();
      pose.block<3, 3>(0, 0) = look * roll;
      pose.block<3, 1>(0, 3) = eye;
      poses.push_back(pose);
    }
  }
  return poses;
}

}  // namespace dflow

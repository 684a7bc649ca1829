#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "dflow/geometry/rigid.hpp"

namespace dflow {

/// Pinhole camera with OpenCV axes (x right, y down, z forward) and a
/// world-from-camera pose.
struct Camera {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  std::uint32_t width = 1;
  std::uint32_t height = 1;
  Eigen::Matrix4d pose = Eigen::Matrix4d::Identity();

  /// Throws InvalidInput unless fx, fy > 0, the image is non-empty and the
  /// pose is rigid (rotation block within 1e-6 of SO(3), last row 0 0 0 1).
  void validate() const;
  bool contains(double u, double v) const {
    return u >= 0.0 && v >= 0.0 && u < static_cast<double>(width) && v < static_cast<double>(height);
  }
  Mat3 rotation() const { return pose.block<3, 3>(0, 0); }
  Vec3 position() const { return pose.block<3, 1>(0, 3); }
};

/// pose * (depth (u - cx) / fx, depth (v - cy) / fy, depth, 1).
/// Throws InvalidDepth for depth <= 0 or non-finite, InvalidInput for a pixel
/// outside the image.
Point3 unproject(const Camera& cam, double u, double v, double depth);

/// Pixel coordinates and camera-space depth of a world point.
struct Projection {
  double u;
  double v;
  double depth;
};
Projection project(const Camera& cam, const Point3& world);

inline const std::vector<double> kDefaultYawsDeg = {0, -30, 30, -60, 60, -90, 90};

/// `count` Fibonacci-spiral positions on the upper hemisphere around
/// `center`, each looking at the center with +z up, then rolled about the
/// view axis by every angle in `yaws_deg`. Position-major order.
std::vector<Eigen::Matrix4d> hemisphere_poses(std::size_t count, double radius,
                                              const Point3& center,
                                              const std::vector<double>& yaws_deg = kDefaultYawsDeg);

}  // namespace dflow

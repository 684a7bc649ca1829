#pragma once

#include "dflow/geometry/rigid.hpp"

namespace dflow {

/// Exponential map so(3) -> SO(3) (Rodrigues). Below |aa| < 1e-6 the
/// second-order Taylor expansion I + [w] + [w]^2 / 2 is used.
Mat3 rotation_from_axis_angle(const Vec3& axis_angle);

/// Right Jacobian of the exponential map:
///   d(exp(w) x)/dw = -exp(w) [x]_x J_r(w)
Mat3 right_jacobian(const Vec3& axis_angle);

/// Equivalent axis-angle vector with magnitude in [0, pi].
Vec3 canonical_axis_angle(const Vec3& axis_angle);

/// Logarithm map SO(3) -> so(3), magnitude in [0, pi].
Vec3 axis_angle_from_rotation(const Mat3& rotation);

}  // namespace dflow

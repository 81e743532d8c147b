#pragma once

// Core scalar/vector aliases shared by all modules.

#include <Eigen/Core>
#include <Eigen/Dense>

namespace bicatch {

using Real = double;

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using VecX = Eigen::VectorXd;

using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using MatX = Eigen::MatrixXd;

inline constexpr Real kPi = 3.14159265358979323846;

inline Real deg2rad(Real deg) { return deg * kPi / 180.0; }
inline Real rad2deg(Real rad) { return rad * 180.0 / kPi; }

// Skew-symmetric matrix: skew(r) * v == r x v.
inline Mat3 skew(const Vec3& r) {
  Mat3 s;
  s << 0.0, -r.z(), r.y(),
       r.z(), 0.0, -r.x(),
      -r.y(), r.x(), 0.0;
  return s;
}

}  // namespace bicatch

#pragma once

// SO(3) / SE(3) group operations used by every pose computation in rsrf.
//
// Conventions:
//  * A Pose maps camera coordinates to world coordinates: x_w = R * x_c + t.
//  * A Twist is ordered (omega, v): rotation part first, translation second.
//  * Perturbations are applied on the left: P' = exp(delta) * P.
//  * Serialized quaternions are Hamilton, stored (qx, qy, qz, qw).

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SVD>

namespace rsrf {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Twist = Vec6;

/// Below this rotation angle (rad) the exponential falls back to a Taylor series.
inline constexpr double kSmallAngle = 1e-6;

[[nodiscard]] Mat3 hat(const Vec3& w);
[[nodiscard]] Vec3 vee(const Mat3& m);
[[nodiscard]] Mat4 hat(const Twist& xi);
[[nodiscard]] Twist vee(const Mat4& m);

inline Vec3 rotation_part(const Twist& xi) { return xi.head<3>(); }
inline Vec3 translation_part(const Twist& xi) { return xi.tail<3>(); }
inline Twist make_twist(const Vec3& omega, const Vec3& v) {
  Twist xi;
  xi << omega, v;
  return xi;
}

[[nodiscard]] Mat3 exp_so3(const Vec3& omega);
/// Throws RotationNearPi when the angle is too close to pi for a stable log.
[[nodiscard]] Vec3 log_so3(const Mat3& r);
/// Rotation angle in radians, in [0, pi].
[[nodiscard]] double rotation_angle(const Mat3& r);

[[nodiscard]] Mat3 so3_left_jacobian(const Vec3& omega);
[[nodiscard]] Mat3 so3_left_jacobian_inverse(const Vec3& omega);

class Pose {
 public:
  Pose() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}
  Pose(const Mat3& rotation, const Vec3& translation)
      : rotation_(rotation), translation_(translation) {}

  static Pose identity() { return {}; }
  static Pose from_translation(const Vec3& t) { return {Mat3::Identity(), t}; }
  static Pose from_rotation(const Mat3& r) { return {r, Vec3::Zero()}; }
  /// Quaternion is normalized before conversion.
  static Pose from_quaternion(const Eigen::Quaterniond& q, const Vec3& t);

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }
  Eigen::Quaterniond quaternion() const;
  Mat4 matrix() const;

  Pose inverse() const;
  Vec3 act(const Vec3& x) const { return rotation_ * x + translation_; }
  Pose operator*(const Pose& other) const;

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

inline Pose compose(const Pose& a, const Pose& b) { return a * b; }
inline Pose inverse(const Pose& p) { return p.inverse(); }
inline Vec3 act(const Pose& p, const Vec3& x) { return p.act(x); }

[[nodiscard]] Pose exp_se3(const Twist& xi);
/// Throws RotationNearPi when trace(R) <= -1 + 1e-9.
[[nodiscard]] Twist log_se3(const Pose& p);

/// Adjoint such that P * exp(xi) = exp(adjoint(P) * xi) * P.
[[nodiscard]] Mat6 adjoint(const Pose& p);

/// Left Jacobian of SE(3): exp(xi + d) ~= exp(J_l(xi) d) * exp(xi).
[[nodiscard]] Mat6 se3_left_jacobian(const Twist& xi);
[[nodiscard]] Mat6 se3_left_jacobian_inverse(const Twist& xi);
/// Right Jacobian: exp(xi + d) ~= exp(xi) * exp(J_r(xi) d).
inline Mat6 se3_right_jacobian(const Twist& xi) { return se3_left_jacobian(-xi); }
inline Mat6 se3_right_jacobian_inverse(const Twist& xi) {
  return se3_left_jacobian_inverse(-xi);
}

/// Max abs deviation of R^T R from identity.
[[nodiscard]] double orthonormality_error(const Mat3& r);
[[nodiscard]] Mat3 reorthonormalize(const Mat3& r);

}  // namespace rsrf

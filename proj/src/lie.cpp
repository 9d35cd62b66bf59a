#include "rsrf/lie.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rsrf/error.hpp"

namespace rsrf {
namespace {

// Series thresholds for the Jacobian coefficients. Their closed forms divide by
// up to theta^5 and lose precision well before kSmallAngle.
constexpr double kJacobianSeriesAngle = 1e-2;
constexpr double kLogTraceGuard = 1e-9;
constexpr double kReorthTolerance = 1e-9;

struct RodriguesCoeffs {
  double a;  // sin(t)/t
  double b;  // (1 - cos(t))/t^2
  double c;  // (t - sin(t))/t^3
};

RodriguesCoeffs rodrigues_coeffs(double theta) {
  const double t2 = theta * theta;
  if (theta < kSmallAngle) {
    return {1.0 - t2 / 6.0, 0.5 - t2 / 24.0, 1.0 / 6.0 - t2 / 120.0};
  }
  const double s = std::sin(theta);
  const double half = std::sin(0.5 * theta);
  const double c = theta < kJacobianSeriesAngle
                       ? 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0
                       : (theta - s) / (t2 * theta);
  return {s / theta, 2.0 * half * half / t2, c};
}

}  // namespace

Mat3 hat(const Vec3& w) {
  Mat3 m;
  // clang-format off
  m <<     0.0, -w.z(),  w.y(),
         w.z(),    0.0, -w.x(),
        -w.y(),  w.x(),    0.0;
  // clang-format on
  return m;
}

Vec3 vee(const Mat3& m) { return {m(2, 1), m(0, 2), m(1, 0)}; }

Mat4 hat(const Twist& xi) {
  Mat4 m = Mat4::Zero();
  m.topLeftCorner<3, 3>() = hat(Vec3(xi.head<3>()));
  m.topRightCorner<3, 1>() = xi.tail<3>();
  return m;
}

Twist vee(const Mat4& m) {
  return make_twist(vee(Mat3(m.topLeftCorner<3, 3>())), m.topRightCorner<3, 1>());
}

Mat3 exp_so3(const Vec3& omega) {
  const double theta = omega.norm();
  const auto k = rodrigues_coeffs(theta);
  const Mat3 w = hat(omega);
  return Mat3::Identity() + k.a * w + k.b * w * w;
}

double rotation_angle(const Mat3& r) {
  const double c = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
  const double s = 0.5 * vee(Mat3(r - r.transpose())).norm();
  return std::atan2(s, c);
}

Vec3 log_so3(const Mat3& r) {
  const double tr = r.trace();
  if (tr <= -1.0 + kLogTraceGuard) {
    throw RotationNearPi("log_so3: rotation angle too close to pi (trace = " +
                         std::to_string(tr) + ")");
  }
  const Vec3 a = 0.5 * vee(Mat3(r - r.transpose()));
  const double s = a.norm();
  const double c = std::clamp(0.5 * (tr - 1.0), -1.0, 1.0);
  const double theta = std::atan2(s, c);
  if (theta < kSmallAngle) {
    return a * (1.0 + theta * theta / 6.0);
  }
  return a * (theta / s);
}

Mat3 so3_left_jacobian(const Vec3& omega) {
  const auto k = rodrigues_coeffs(omega.norm());
  const Mat3 w = hat(omega);
  return Mat3::Identity() + k.b * w + k.c * w * w;
}

Mat3 so3_left_jacobian_inverse(const Vec3& omega) {
  const double theta = omega.norm();
  const double t2 = theta * theta;
  double d;
  if (theta < kJacobianSeriesAngle) {
    d = 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0;
  } else {
    d = 1.0 / t2 - (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  }
  const Mat3 w = hat(omega);
  return Mat3::Identity() - 0.5 * w + d * w * w;
}

Pose Pose::from_quaternion(const Eigen::Quaterniond& q, const Vec3& t) {
  return {q.normalized().toRotationMatrix(), t};
}

Eigen::Quaterniond Pose::quaternion() const {
  Eigen::Quaterniond q(rotation_);
  q.normalize();
  // Canonical hemisphere so serialization is stable.
  if (q.w() < 0.0) q.coeffs() *= -1.0;
  return q;
}

Mat4 Pose::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

Pose Pose::inverse() const {
  const Mat3 rt = rotation_.transpose();
  return {rt, -(rt * translation_)};
}

Pose Pose::operator*(const Pose& other) const {
  Mat3 r = rotation_ * other.rotation_;
  if (orthonormality_error(r) > kReorthTolerance) r = reorthonormalize(r);
  return {r, rotation_ * other.translation_ + translation_};
}

Pose exp_se3(const Twist& xi) {
  const Vec3 omega = xi.head<3>();
  const Vec3 v = xi.tail<3>();
  const auto k = rodrigues_coeffs(omega.norm());
  const Mat3 w = hat(omega);
  const Mat3 w2 = w * w;
  const Mat3 r = Mat3::Identity() + k.a * w + k.b * w2;
  const Mat3 jl = Mat3::Identity() + k.b * w + k.c * w2;
  return {r, jl * v};
}

Twist log_se3(const Pose& p) {
  const Vec3 omega = log_so3(p.rotation());
  return make_twist(omega, so3_left_jacobian_inverse(omega) * p.translation());
}

Mat6 adjoint(const Pose& p) {
  Mat6 ad = Mat6::Zero();
  const Mat3& r = p.rotation();
  ad.topLeftCorner<3, 3>() = r;
  ad.bottomRightCorner<3, 3>() = r;
  ad.bottomLeftCorner<3, 3>() = hat(p.translation()) * r;
  return ad;
}

namespace {

// Coupling block of the SE(3) left Jacobian for (omega, v) ordering.
Mat3 se3_q_block(const Vec3& omega, const Vec3& v) {
  const double theta = omega.norm();
  const double t2 = theta * theta;
  double a, b, c;
  if (theta < kJacobianSeriesAngle) {
    a = 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0;
    b = 1.0 / 24.0 - t2 / 720.0 + t2 * t2 / 40320.0;
    c = 1.0 / 120.0 - t2 / 2520.0 + t2 * t2 / 120960.0;
  } else {
    const double s = std::sin(theta);
    const double co = std::cos(theta);
    const double t3 = t2 * theta;
    const double t4 = t2 * t2;
    const double t5 = t4 * theta;
    a = (theta - s) / t3;
    b = (t2 + 2.0 * co - 2.0) / (2.0 * t4);
    c = -0.5 * ((1.0 - 0.5 * t2 - co) / t4 - 3.0 * (theta - s - t3 / 6.0) / t5);
  }
  const Mat3 w = hat(omega);
  const Mat3 p = hat(v);
  const Mat3 wp = w * p;
  const Mat3 pw = p * w;
  const Mat3 wpw = wp * w;
  return 0.5 * p + a * (wp + pw + wpw) + b * (w * wp + pw * w - 3.0 * wpw) +
         c * (wpw * w + w * wpw);
}

}  // namespace

Mat6 se3_left_jacobian(const Twist& xi) {
  const Vec3 omega = xi.head<3>();
  const Mat3 j = so3_left_jacobian(omega);
  Mat6 out = Mat6::Zero();
  out.topLeftCorner<3, 3>() = j;
  out.bottomRightCorner<3, 3>() = j;
  out.bottomLeftCorner<3, 3>() = se3_q_block(omega, xi.tail<3>());
  return out;
}

Mat6 se3_left_jacobian_inverse(const Twist& xi) {
  const Vec3 omega = xi.head<3>();
  const Mat3 jinv = so3_left_jacobian_inverse(omega);
  Mat6 out = Mat6::Zero();
  out.topLeftCorner<3, 3>() = jinv;
  out.bottomRightCorner<3, 3>() = jinv;
  out.bottomLeftCorner<3, 3>() = -jinv * se3_q_block(omega, xi.tail<3>()) * jinv;
  return out;
}

double orthonormality_error(const Mat3& r) {
  return (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
}

Mat3 reorthonormalize(const Mat3& r) {
  Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 out = svd.matrixU() * svd.matrixV().transpose();
  if (out.determinant() < 0.0) {
    Mat3 u = svd.matrixU();
    u.col(2) *= -1.0;
    out = u * svd.matrixV().transpose();
  }
  return out;
}

}  // namespace rsrf

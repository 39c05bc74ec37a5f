#include "ringlio/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ringlio/errors.hpp"

namespace ringlio {

namespace {

constexpr double kSmallAngle = 1e-8;
constexpr double kLogCutMargin = 1e-6;

}  // namespace

UnitQuaternion::UnitQuaternion(double w, double x, double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw DomainError("UnitQuaternion: cannot normalize a zero or non-finite quaternion");
  }
  const double s = (w < 0.0 ? -1.0 : 1.0) / n;
  w_ = w * s;
  x_ = x * s;
  y_ = y * s;
  z_ = z * s;
}

UnitQuaternion UnitQuaternion::from_rotation_matrix(const Mat3& rotation) {
  return from_eigen(Eigen::Quaterniond(rotation));
}

UnitQuaternion UnitQuaternion::from_wxyz(const Vec4& wxyz) {
  return {wxyz[0], wxyz[1], wxyz[2], wxyz[3]};
}

UnitQuaternion UnitQuaternion::from_eigen(const Eigen::Quaterniond& q) {
  return {q.w(), q.x(), q.y(), q.z()};
}

UnitQuaternion UnitQuaternion::inverse() const {
  UnitQuaternion out;
  out.w_ = w_;
  out.x_ = -x_;
  out.y_ = -y_;
  out.z_ = -z_;
  return out;
}

Mat3 UnitQuaternion::to_rotation_matrix() const {
  const double ww = w_ * w_, xx = x_ * x_, yy = y_ * y_, zz = z_ * z_;
  const double xy = x_ * y_, xz = x_ * z_, yz = y_ * z_;
  const double wx = w_ * x_, wy = w_ * y_, wz = w_ * z_;
  Mat3 r;
  r << ww + xx - yy - zz, 2.0 * (xy - wz), 2.0 * (xz + wy),
       2.0 * (xy + wz), ww - xx + yy - zz, 2.0 * (yz - wx),
       2.0 * (xz - wy), 2.0 * (yz + wx), ww - xx - yy + zz;
  return r;
}

Vec3 UnitQuaternion::rotate(const Vec3& v) const {
  // v' = v + 2w (u x v) + 2 u x (u x v)
  const Vec3 u(x_, y_, z_);
  const Vec3 t = 2.0 * u.cross(v);
  return v + w_ * t + u.cross(t);
}

UnitQuaternion UnitQuaternion::operator*(const UnitQuaternion& b) const {
  return {w_ * b.w_ - x_ * b.x_ - y_ * b.y_ - z_ * b.z_,
          w_ * b.x_ + x_ * b.w_ + y_ * b.z_ - z_ * b.y_,
          w_ * b.y_ - x_ * b.z_ + y_ * b.w_ + z_ * b.x_,
          w_ * b.z_ + x_ * b.y_ - y_ * b.x_ + z_ * b.w_};
}

UnitQuaternion quat_multiply(const UnitQuaternion& a, const UnitQuaternion& b) { return a * b; }

Mat3 quat_to_rotmat(const UnitQuaternion& q) { return q.to_rotation_matrix(); }

Mat4 omega_matrix(const Vec3& w) {
  Mat4 m;
  m << 0.0, -w.x(), -w.y(), -w.z(),
       w.x(), 0.0, w.z(), -w.y(),
       w.y(), -w.z(), 0.0, w.x(),
       w.z(), w.y(), -w.x(), 0.0;
  return m;
}

Mat4 quat_left_matrix(const UnitQuaternion& q) {
  Mat4 m;
  m << q.w(), -q.x(), -q.y(), -q.z(),
       q.x(), q.w(), -q.z(), q.y(),
       q.y(), q.z(), q.w(), -q.x(),
       q.z(), -q.y(), q.x(), q.w();
  return m;
}

Mat4 quat_right_matrix(const UnitQuaternion& q) {
  Mat4 m;
  m << q.w(), -q.x(), -q.y(), -q.z(),
       q.x(), q.w(), q.z(), -q.y(),
       q.y(), -q.z(), q.w(), q.x(),
       q.z(), q.y(), -q.x(), q.w();
  return m;
}

UnitQuaternion so3_exp(const Vec3& phi) {
  const double theta = phi.norm();
  if (theta < kSmallAngle) {
    return {1.0, 0.5 * phi.x(), 0.5 * phi.y(), 0.5 * phi.z()};
  }
  const double half = 0.5 * theta;
  const Vec3 v = (std::sin(half) / theta) * phi;
  return {std::cos(half), v.x(), v.y(), v.z()};
}

Vec3 so3_log(const UnitQuaternion& q) {
  // Shortest arc regardless of the sign the caller hands in.
  double w = q.w();
  Vec3 v = quat_vec(q);
  if (w < 0.0) {
    w = -w;
    v = -v;
  }
  const double vn = v.norm();
  const double theta = 2.0 * std::atan2(vn, w);
  if (theta >= std::numbers::pi - kLogCutMargin) {
    throw DomainError("so3_log: rotation angle too close to pi");
  }
  if (theta < kSmallAngle) {
    return (2.0 / w) * v;
  }
  return (theta / vn) * v;
}

double rotation_angle(const UnitQuaternion& q) {
  return 2.0 * std::atan2(quat_vec(q).norm(), std::abs(q.w()));
}

Vec3 quat_vec(const UnitQuaternion& q) { return {q.x(), q.y(), q.z()}; }

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Mat3 so3_right_jacobian(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 k = skew(phi);
  if (theta < 1e-5) {
    return Mat3::Identity() - 0.5 * k + (1.0 / 6.0) * k * k;
  }
  const double t2 = theta * theta;
  return Mat3::Identity() - ((1.0 - std::cos(theta)) / t2) * k +
         ((theta - std::sin(theta)) / (t2 * theta)) * k * k;
}

Mat3 so3_right_jacobian_inverse(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 k = skew(phi);
  if (theta < 1e-5) {
    return Mat3::Identity() + 0.5 * k + (1.0 / 12.0) * k * k;
  }
  const double t2 = theta * theta;
  const double c = 1.0 / t2 - (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  return Mat3::Identity() + 0.5 * k + c * k * k;
}

UnitQuaternion quat_from_rpy(double roll, double pitch, double yaw) {
  const Eigen::Quaterniond q = Eigen::AngleAxisd(yaw, Vec3::UnitZ()) *
                               Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
                               Eigen::AngleAxisd(roll, Vec3::UnitX());
  return UnitQuaternion::from_eigen(q);
}

Vec3 rpy_from_quat(const UnitQuaternion& q) {
  const Mat3 r = q.to_rotation_matrix();
  const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  const double roll = std::atan2(r(2, 1), r(2, 2));
  const double yaw = std::atan2(r(1, 0), r(0, 0));
  return {roll, pitch, yaw};
}

PoseSE3 PoseSE3::inverse() const {
  const UnitQuaternion inv = rotation.inverse();
  return {inv, -inv.rotate(translation)};
}

PoseSE3 PoseSE3::operator*(const PoseSE3& rhs) const {
  return {rotation * rhs.rotation, rotation.rotate(rhs.translation) + translation};
}

PoseSE3 compose(const PoseSE3& a, const PoseSE3& b) { return a * b; }

PoseSE3 between(const PoseSE3& a, const PoseSE3& b) { return a.inverse() * b; }

PoseSE3 apply_left_increment(const PoseSE3& pose, const Eigen::Matrix<double, 6, 1>& xi) {
  const UnitQuaternion dq = so3_exp(xi.tail<3>());
  return {dq * pose.rotation, dq.rotate(pose.translation) + xi.head<3>()};
}

bool is_finite(const PoseSE3& pose) {
  return pose.translation.allFinite() && pose.rotation.wxyz().allFinite();
}

}  // namespace ringlio

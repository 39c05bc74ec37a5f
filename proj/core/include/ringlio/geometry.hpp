#pragma once

// Rotation and rigid-transform primitives.
//
// Conventions used throughout the library:
//  - Hamilton quaternions, stored and exposed in (w, x, y, z) order.
//  - q rotates vectors from a body frame into a reference frame: v_ref = q * v_body.
//  - Orientation perturbations are applied on the right: R <- R * Exp(dtheta).
//  - Canonical sign w >= 0 after every normalization (constructor, product).

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace ringlio {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

class UnitQuaternion {
 public:
  UnitQuaternion() = default;

  /// Normalizes the input and flips it to the w >= 0 hemisphere.
  UnitQuaternion(double w, double x, double y, double z);

  static UnitQuaternion identity() { return {}; }
  static UnitQuaternion from_rotation_matrix(const Mat3& rotation);
  /// wxyz-ordered 4-vector.
  static UnitQuaternion from_wxyz(const Vec4& wxyz);
  static UnitQuaternion from_eigen(const Eigen::Quaterniond& q);

  double w() const { return w_; }
  double x() const { return x_; }
  double y() const { return y_; }
  double z() const { return z_; }

  Vec4 wxyz() const { return {w_, x_, y_, z_}; }
  Eigen::Quaterniond to_eigen() const { return {w_, x_, y_, z_}; }

  /// Conjugate; equal to the inverse for unit quaternions.
  UnitQuaternion inverse() const;
  Mat3 to_rotation_matrix() const;
  Vec3 rotate(const Vec3& v) const;

  UnitQuaternion operator*(const UnitQuaternion& rhs) const;

 private:
  double w_ = 1.0;
  double x_ = 0.0;
  double y_ = 0.0;
  double z_ = 0.0;
};

/// Hamilton product a * b, renormalized.
UnitQuaternion quat_multiply(const UnitQuaternion& a, const UnitQuaternion& b);

Mat3 quat_to_rotmat(const UnitQuaternion& q);

/// 4x4 matrix with omega_matrix(w) * q == q * [0, w] for q in wxyz layout.
///
/// This is the Hamilton counterpart of the JPL "Omega" matrix: the body-rate
/// kinematics q_dot = 0.5 * q * [0, w] become q_dot = 0.5 * omega_matrix(w) * q.
Mat4 omega_matrix(const Vec3& omega);

/// Left/right quaternion product matrices: a * b == left_matrix(a) * b == right_matrix(b) * a.
Mat4 quat_left_matrix(const UnitQuaternion& q);
Mat4 quat_right_matrix(const UnitQuaternion& q);

UnitQuaternion so3_exp(const Vec3& phi);

/// Rotation vector of q. Throws DomainError when the rotation angle is within
/// 1e-6 rad of pi, where the log is not unique.
Vec3 so3_log(const UnitQuaternion& q);

/// Rotation angle in [0, pi]; never throws.
double rotation_angle(const UnitQuaternion& q);

/// Imaginary part (x, y, z).
Vec3 quat_vec(const UnitQuaternion& q);

Mat3 skew(const Vec3& v);

/// Right Jacobian of SO(3): Exp(phi + d) ~= Exp(phi) * Exp(Jr(phi) * d).
Mat3 so3_right_jacobian(const Vec3& phi);
Mat3 so3_right_jacobian_inverse(const Vec3& phi);

/// Z-Y-X (yaw, pitch, roll) helpers. rpy = (roll, pitch, yaw).
UnitQuaternion quat_from_rpy(double roll, double pitch, double yaw);
Vec3 rpy_from_quat(const UnitQuaternion& q);

struct PoseSE3 {
  UnitQuaternion rotation;
  Vec3 translation = Vec3::Zero();

  static PoseSE3 identity() { return {}; }

  PoseSE3 inverse() const;
  Vec3 transform(const Vec3& p) const { return rotation.rotate(p) + translation; }
  PoseSE3 operator*(const PoseSE3& rhs) const;
};

PoseSE3 compose(const PoseSE3& a, const PoseSE3& b);

/// a^{-1} * b, the relative transform taking b's frame into a's frame.
PoseSE3 between(const PoseSE3& a, const PoseSE3& b);

/// Left-perturbation retraction used by ICP: Exp([rho, phi]) * pose, with the
/// translational part applied as a plain offset.
PoseSE3 apply_left_increment(const PoseSE3& pose, const Eigen::Matrix<double, 6, 1>& xi);

bool is_finite(const PoseSE3& pose);

}  // namespace ringlio

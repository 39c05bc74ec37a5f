#pragma once

#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "ringlio/geometry.hpp"

namespace ringlio {

using Mat15 = Eigen::Matrix<double, 15, 15>;

/// Error-state layout of the 15x15 covariance: (dp, dv, dtheta, dba, dbg).
namespace state_index {
inline constexpr int kP = 0;
inline constexpr int kV = 3;
inline constexpr int kTheta = 6;
inline constexpr int kBa = 9;
inline constexpr int kBg = 12;
}  // namespace state_index

struct ImuSample {
  double t = 0.0;
  Vec3 acc = Vec3::Zero();   ///< a_m, m/s^2, IMU frame
  Vec3 gyro = Vec3::Zero();  ///< w_m, rad/s, IMU frame
};

struct ImuState {
  double t = 0.0;
  Vec3 p = Vec3::Zero();  ///< position of the IMU in the world frame
  Vec3 v = Vec3::Zero();
  UnitQuaternion q;       ///< IMU -> world
  Vec3 ba = Vec3::Zero();
  Vec3 bg = Vec3::Zero();
  Mat15 P = Mat15::Zero();

  PoseSE3 pose() const { return {q, p}; }
};

/// Continuous-time noise densities and gravity.
///
/// `gravity` is the specific-force reaction at rest expressed in the world
/// frame, so the velocity kinematics read v_dot = R (a_m - b_a) - gravity and a
/// level IMU at rest measures a_m = (0, 0, |g|).
struct NoiseParams {
  Vec3 sigma_acc = Vec3::Constant(2e-3);        ///< m/s^2/sqrt(Hz)
  Vec3 sigma_acc_bias = Vec3::Constant(1e-4);   ///< m/s^3/sqrt(Hz)
  Vec3 sigma_gyro = Vec3::Constant(2e-4);       ///< rad/s/sqrt(Hz)
  Vec3 sigma_gyro_bias = Vec3::Constant(1e-5);  ///< rad/s^2/sqrt(Hz)
  Vec3 gravity = Vec3(0.0, 0.0, 9.81);
  /// Integrate Q_d over the step (trapezoid on F Qc F^T) instead of G Qc G^T dt.
  bool full_qd_integral = false;

  static NoiseParams zero();
};

/// Upper bound on a single propagation step; larger gaps are stream errors.
inline constexpr double kMaxImuStep = 0.1;

/// a = a_m - b_a, w = w_m - b_g.
std::pair<Vec3, Vec3> correct_measurement(const ImuSample& s, const Vec3& ba, const Vec3& bg);

/// Midpoint propagation between two consecutive samples (dt = s1.t - s0.t).
/// Biases and covariance are carried over unchanged.
ImuState propagate_state(const ImuState& x, const ImuSample& s0, const ImuSample& s1,
                         const NoiseParams& noise);

/// Constant-input propagation of one sample held over dt.
ImuState propagate_state(const ImuState& x, const ImuSample& s, double dt, const NoiseParams& noise);

/// Discrete error-state transition of the midpoint step, in (dp, dv, dtheta, dba, dbg) order.
Mat15 discrete_transition(const ImuState& x, const ImuSample& s0, const ImuSample& s1,
                          const NoiseParams& noise);

/// Q_d for one step of length dt taken from state x.
Mat15 discrete_process_noise(const ImuState& x, const Mat15& transition, double dt,
                             const NoiseParams& noise);

/// F_d P F_d^T + Q_d, symmetrized.
Mat15 propagate_covariance(const ImuState& x, const ImuSample& s0, const ImuSample& s1,
                           const NoiseParams& noise);
Mat15 propagate_covariance(const ImuState& x, const ImuSample& s, double dt,
                           const NoiseParams& noise);

/// State and covariance together.
ImuState propagate(const ImuState& x, const ImuSample& s0, const ImuSample& s1,
                   const NoiseParams& noise);

/// Linear interpolation of a sample at time t in [a.t, b.t].
ImuSample interpolate_sample(const ImuSample& a, const ImuSample& b, double t);

/// Roll/pitch from averaged stationary accelerometer data, yaw = 0.
UnitQuaternion align_gravity(std::span<const ImuSample> stationary, const NoiseParams& noise);

/// `t,ax,ay,az,wx,wy,wz` with a header line.
std::vector<ImuSample> read_imu_csv(const std::filesystem::path& path);
void write_imu_csv(const std::filesystem::path& path, std::span<const ImuSample> samples);

}  // namespace ringlio

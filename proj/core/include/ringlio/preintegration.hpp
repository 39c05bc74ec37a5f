#pragma once

#include <Eigen/Core>

#include "ringlio/geometry.hpp"
#include "ringlio/imu.hpp"

namespace ringlio {

using Mat9 = Eigen::Matrix<double, 9, 9>;
using Mat96 = Eigen::Matrix<double, 9, 6>;

/// Block offsets inside the 9-dim increment (dp, dv, dtheta) and the bias
/// Jacobian columns (ba, bg).
namespace pim_index {
inline constexpr int kP = 0;
inline constexpr int kV = 3;
inline constexpr int kTheta = 6;
inline constexpr int kBa = 0;
inline constexpr int kBg = 3;
}  // namespace pim_index

/// Pre-integrated IMU motion between two keyframe times, expressed in the IMU
/// frame at the first keyframe. Gravity is not part of the increment; it only
/// enters in pim_predict.
struct Pim {
  Vec3 delta_p = Vec3::Zero();
  Vec3 delta_v = Vec3::Zero();
  UnitQuaternion delta_q;
  double delta_t = 0.0;
  Mat9 cov = Mat9::Zero();
  Vec3 ba_lin = Vec3::Zero();
  Vec3 bg_lin = Vec3::Zero();
  /// d(dp, dv, dtheta) / d(ba, bg) at the linearization point.
  Mat96 bias_jacobian = Mat96::Zero();

  /// Fresh identity increment linearized at the given biases.
  static Pim at_bias(const Vec3& ba, const Vec3& bg);
};

/// Adds the interval [s0.t, s1.t] with the same midpoint scheme as propagate_state.
Pim pim_integrate(const Pim& pim, const ImuSample& s0, const ImuSample& s1, const NoiseParams& noise);

/// Adds one sample held constant over dt.
Pim pim_integrate(const Pim& pim, const ImuSample& s, double dt, const NoiseParams& noise);

struct PredictedMotion {
  Vec3 p;
  Vec3 v;
  UnitQuaternion q;
};

/// State at the end of the increment, given the state at its start.
/// `gravity` follows the NoiseParams convention (v_dot = R a - gravity).
PredictedMotion pim_predict(const ImuState& xi, const Pim& pim, const Vec3& gravity);

/// First-order bias update through the stored Jacobians. The returned Pim is
/// linearized at (ba_lin + dba, bg_lin + dbg) but keeps the original Jacobians.
Pim pim_correct_bias(const Pim& pim, const Vec3& dba, const Vec3& dbg);

/// Magnitude above which pim_correct_bias leaves its first-order regime.
inline constexpr double kBiasCorrectionWarnLimit = 0.1;
bool bias_correction_is_large(const Vec3& dba, const Vec3& dbg);

}  // namespace ringlio

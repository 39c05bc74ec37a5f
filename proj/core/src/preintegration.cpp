#include "ringlio/preintegration.hpp"

#include <fmt/format.h>

#include "ringlio/errors.hpp"

namespace ringlio {

namespace pi = pim_index;

Pim Pim::at_bias(const Vec3& ba, const Vec3& bg) {
  Pim p;
  p.ba_lin = ba;
  p.bg_lin = bg;
  return p;
}

namespace {

Pim integrate_interval(const Pim& in, const ImuSample& s0, const ImuSample& s1, double dt,
                       const NoiseParams& noise) {
  if (!(dt > 0.0)) {
    throw DomainError(fmt::format("pim_integrate: non-positive dt {}", dt));
  }
  const Vec3 omega = 0.5 * (s0.gyro + s1.gyro) - in.bg_lin;
  const Vec3 u0 = s0.acc - in.ba_lin;
  const Vec3 u1 = s1.acc - in.ba_lin;
  const UnitQuaternion step = so3_exp(omega * dt);
  const UnitQuaternion q1 = in.delta_q * step;
  const Mat3 r0 = in.delta_q.to_rotation_matrix();
  const Mat3 r1 = q1.to_rotation_matrix();
  const Mat3 dr = step.to_rotation_matrix();
  const Mat3 jr = so3_right_jacobian(omega * dt);
  const Vec3 acc = 0.5 * (r0 * u0 + r1 * u1);

  Pim out = in;
  out.delta_p = in.delta_p + in.delta_v * dt + 0.5 * acc * dt * dt;
  out.delta_v = in.delta_v + acc * dt;
  out.delta_q = q1;
  out.delta_t = in.delta_t + dt;

  // Bias Jacobians, differentiated through the same discrete step.
  const Mat3 dth_dbg0 = in.bias_jacobian.block<3, 3>(pi::kTheta, pi::kBg);
  const Mat3 dth_dbg1 = dr.transpose() * dth_dbg0 - jr * dt;
  const Mat3 dacc_dba = -0.5 * (r0 + r1);
  const Mat3 dacc_dbg = -0.5 * (r0 * skew(u0) * dth_dbg0 + r1 * skew(u1) * dth_dbg1);

  const Mat3 dp_dba = in.bias_jacobian.block<3, 3>(pi::kP, pi::kBa);
  const Mat3 dp_dbg = in.bias_jacobian.block<3, 3>(pi::kP, pi::kBg);
  const Mat3 dv_dba = in.bias_jacobian.block<3, 3>(pi::kV, pi::kBa);
  const Mat3 dv_dbg = in.bias_jacobian.block<3, 3>(pi::kV, pi::kBg);
  out.bias_jacobian.block<3, 3>(pi::kP, pi::kBa) = dp_dba + dv_dba * dt + 0.5 * dacc_dba * dt * dt;
  out.bias_jacobian.block<3, 3>(pi::kP, pi::kBg) = dp_dbg + dv_dbg * dt + 0.5 * dacc_dbg * dt * dt;
  out.bias_jacobian.block<3, 3>(pi::kV, pi::kBa) = dv_dba + dacc_dba * dt;
  out.bias_jacobian.block<3, 3>(pi::kV, pi::kBg) = dv_dbg + dacc_dbg * dt;
  out.bias_jacobian.block<3, 3>(pi::kTheta, pi::kBa).setZero();
  out.bias_jacobian.block<3, 3>(pi::kTheta, pi::kBg) = dth_dbg1;

  // Increment covariance: same transition restricted to (dp, dv, dtheta).
  const Mat3 dacc_dth = -0.5 * (r0 * skew(u0) + r1 * skew(u1) * dr.transpose());
  Mat9 a = Mat9::Identity();
  a.block<3, 3>(pi::kP, pi::kV) = Mat3::Identity() * dt;
  a.block<3, 3>(pi::kP, pi::kTheta) = 0.5 * dt * dt * dacc_dth;
  a.block<3, 3>(pi::kV, pi::kTheta) = dacc_dth * dt;
  a.block<3, 3>(pi::kTheta, pi::kTheta) = dr.transpose();

  Mat9 qd = Mat9::Zero();
  qd.block<3, 3>(pi::kV, pi::kV) = r0 * noise.sigma_acc.cwiseAbs2().asDiagonal() * r0.transpose() * dt;
  qd.block<3, 3>(pi::kTheta, pi::kTheta) = noise.sigma_gyro.cwiseAbs2().asDiagonal() * dt;

  out.cov = a * in.cov * a.transpose() + qd;
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  return out;
}

}  // namespace

Pim pim_integrate(const Pim& pim, const ImuSample& s0, const ImuSample& s1, const NoiseParams& noise) {
  return integrate_interval(pim, s0, s1, s1.t - s0.t, noise);
}

Pim pim_integrate(const Pim& pim, const ImuSample& s, double dt, const NoiseParams& noise) {
  return integrate_interval(pim, s, s, dt, noise);
}

PredictedMotion pim_predict(const ImuState& xi, const Pim& pim, const Vec3& gravity) {
  const double dt = pim.delta_t;
  PredictedMotion m;
  m.p = xi.p + xi.v * dt - 0.5 * gravity * dt * dt + xi.q.rotate(pim.delta_p);
  m.v = xi.v - gravity * dt + xi.q.rotate(pim.delta_v);
  m.q = xi.q * pim.delta_q;
  return m;
}

Pim pim_correct_bias(const Pim& pim, const Vec3& dba, const Vec3& dbg) {
  Pim out = pim;
  const auto& j = pim.bias_jacobian;
  out.delta_p += j.block<3, 3>(pi::kP, pi::kBa) * dba + j.block<3, 3>(pi::kP, pi::kBg) * dbg;
  out.delta_v += j.block<3, 3>(pi::kV, pi::kBa) * dba + j.block<3, 3>(pi::kV, pi::kBg) * dbg;
  out.delta_q = pim.delta_q * so3_exp(j.block<3, 3>(pi::kTheta, pi::kBg) * dbg);
  out.ba_lin += dba;
  out.bg_lin += dbg;
  return out;
}

bool bias_correction_is_large(const Vec3& dba, const Vec3& dbg) {
  return dba.norm() > kBiasCorrectionWarnLimit || dbg.norm() > kBiasCorrectionWarnLimit;
}

}  // namespace ringlio

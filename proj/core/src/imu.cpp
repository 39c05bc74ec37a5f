#include "ringlio/imu.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "ringlio/errors.hpp"
#include "ringlio/text_io.hpp"

namespace ringlio {

namespace si = state_index;

NoiseParams NoiseParams::zero() {
  NoiseParams n;
  n.sigma_acc.setZero();
  n.sigma_acc_bias.setZero();
  n.sigma_gyro.setZero();
  n.sigma_gyro_bias.setZero();
  return n;
}

std::pair<Vec3, Vec3> correct_measurement(const ImuSample& s, const Vec3& ba, const Vec3& bg) {
  return {s.acc - ba, s.gyro - bg};
}

namespace {

void check_step(double t_from, double t_to) {
  const double dt = t_to - t_from;
  if (!(dt > 0.0) || dt > kMaxImuStep + 1e-9) {
    throw PropagationGapError(
        t_from, t_to,
        fmt::format("IMU propagation gap: step from t={:.9f} to t={:.9f} (dt={:.6g} s) outside (0, {}]",
                    t_from, t_to, dt, kMaxImuStep));
  }
}

struct MidpointStep {
  Mat3 r0;
  Mat3 r1;
  UnitQuaternion q1;
  Vec3 u0;  // bias-corrected accelerations
  Vec3 u1;
  Vec3 omega;  // bias-corrected midpoint rate
  double dt;
};

MidpointStep midpoint_step(const ImuState& x, const ImuSample& s0, const ImuSample& s1, double dt) {
  MidpointStep m;
  m.dt = dt;
  m.omega = 0.5 * (s0.gyro + s1.gyro) - x.bg;
  m.q1 = x.q * so3_exp(m.omega * dt);
  m.r0 = x.q.to_rotation_matrix();
  m.r1 = m.q1.to_rotation_matrix();
  m.u0 = s0.acc - x.ba;
  m.u1 = s1.acc - x.ba;
  return m;
}

ImuState advance(const ImuState& x, const MidpointStep& m, const NoiseParams& noise) {
  const Vec3 acc_world = 0.5 * (m.r0 * m.u0 + m.r1 * m.u1) - noise.gravity;
  ImuState out = x;
  out.t = x.t + m.dt;
  out.p = x.p + x.v * m.dt + 0.5 * acc_world * m.dt * m.dt;
  out.v = x.v + acc_world * m.dt;
  out.q = m.q1;
  return out;
}

Mat15 transition_of(const MidpointStep& m) {
  const double dt = m.dt;
  const Mat3 dR = m.r0.transpose() * m.r1;
  const Mat3 jr = so3_right_jacobian(m.omega * dt);

  // d(mean world acceleration) / d(error state)
  const Mat3 da_dtheta = -0.5 * (m.r0 * skew(m.u0) + m.r1 * skew(m.u1) * dR.transpose());
  const Mat3 da_dba = -0.5 * (m.r0 + m.r1);
  const Mat3 da_dbg = 0.5 * m.r1 * skew(m.u1) * jr * dt;

  Mat15 f = Mat15::Identity();
  f.block<3, 3>(si::kP, si::kV) = Mat3::Identity() * dt;
  f.block<3, 3>(si::kP, si::kTheta) = 0.5 * dt * dt * da_dtheta;
  f.block<3, 3>(si::kP, si::kBa) = 0.5 * dt * dt * da_dba;
  f.block<3, 3>(si::kP, si::kBg) = 0.5 * dt * dt * da_dbg;
  f.block<3, 3>(si::kV, si::kTheta) = dt * da_dtheta;
  f.block<3, 3>(si::kV, si::kBa) = dt * da_dba;
  f.block<3, 3>(si::kV, si::kBg) = dt * da_dbg;
  f.block<3, 3>(si::kTheta, si::kTheta) = dR.transpose();
  f.block<3, 3>(si::kTheta, si::kBg) = -jr * dt;
  return f;
}

Mat15 continuous_noise_map(const ImuState& x, const NoiseParams& noise) {
  // G_c Q_c G_c^T in error-state coordinates.
  const Mat3 r = x.q.to_rotation_matrix();
  Mat15 q = Mat15::Zero();
  q.block<3, 3>(si::kV, si::kV) = r * noise.sigma_acc.cwiseAbs2().asDiagonal() * r.transpose();
  q.block<3, 3>(si::kTheta, si::kTheta) = noise.sigma_gyro.cwiseAbs2().asDiagonal();
  q.block<3, 3>(si::kBa, si::kBa) = noise.sigma_acc_bias.cwiseAbs2().asDiagonal();
  q.block<3, 3>(si::kBg, si::kBg) = noise.sigma_gyro_bias.cwiseAbs2().asDiagonal();
  return q;
}

Mat15 symmetrize(const Mat15& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

ImuState propagate_state(const ImuState& x, const ImuSample& s0, const ImuSample& s1,
                         const NoiseParams& noise) {
  check_step(s0.t, s1.t);
  return advance(x, midpoint_step(x, s0, s1, s1.t - s0.t), noise);
}

ImuState propagate_state(const ImuState& x, const ImuSample& s, double dt, const NoiseParams& noise) {
  check_step(x.t, x.t + dt);
  return advance(x, midpoint_step(x, s, s, dt), noise);
}

Mat15 discrete_transition(const ImuState& x, const ImuSample& s0, const ImuSample& s1,
                          const NoiseParams& /*noise*/) {
  check_step(s0.t, s1.t);
  return transition_of(midpoint_step(x, s0, s1, s1.t - s0.t));
}

Mat15 discrete_process_noise(const ImuState& x, const Mat15& transition, double dt,
                             const NoiseParams& noise) {
  const Mat15 qc = continuous_noise_map(x, noise);
  if (noise.full_qd_integral) {
    return symmetrize(0.5 * dt * (transition * qc * transition.transpose() + qc));
  }
  return qc * dt;
}

Mat15 propagate_covariance(const ImuState& x, const ImuSample& s0, const ImuSample& s1,
                           const NoiseParams& noise) {
  const Mat15 f = discrete_transition(x, s0, s1, noise);
  const double dt = s1.t - s0.t;
  return symmetrize(f * x.P * f.transpose() + discrete_process_noise(x, f, dt, noise));
}

Mat15 propagate_covariance(const ImuState& x, const ImuSample& s, double dt,
                           const NoiseParams& noise) {
  ImuSample s1 = s;
  ImuSample s0 = s;
  s0.t = x.t;
  s1.t = x.t + dt;
  return propagate_covariance(x, s0, s1, noise);
}

ImuState propagate(const ImuState& x, const ImuSample& s0, const ImuSample& s1,
                   const NoiseParams& noise) {
  ImuState out = propagate_state(x, s0, s1, noise);
  out.P = propagate_covariance(x, s0, s1, noise);
  return out;
}

ImuSample interpolate_sample(const ImuSample& a, const ImuSample& b, double t) {
  const double span = b.t - a.t;
  const double alpha = span > 0.0 ? (t - a.t) / span : 0.0;
  ImuSample s;
  s.t = t;
  s.acc = a.acc + alpha * (b.acc - a.acc);
  s.gyro = a.gyro + alpha * (b.gyro - a.gyro);
  return s;
}

UnitQuaternion align_gravity(std::span<const ImuSample> stationary, const NoiseParams& noise) {
  if (stationary.empty()) {
    throw DomainError("align_gravity: no stationary samples");
  }
  Vec3 mean = Vec3::Zero();
  for (const auto& s : stationary) mean += s.acc;
  mean /= static_cast<double>(stationary.size());
  if (mean.norm() < 1e-6 || noise.gravity.norm() < 1e-6) {
    throw DomainError("align_gravity: degenerate accelerometer mean");
  }
  // R * mean_dir == gravity_dir, then strip the yaw component.
  const Eigen::Quaterniond tilt =
      Eigen::Quaterniond::FromTwoVectors(mean.normalized(), noise.gravity.normalized());
  const Vec3 rpy = rpy_from_quat(UnitQuaternion::from_eigen(tilt));
  return quat_from_rpy(rpy.x(), rpy.y(), 0.0);
}

std::vector<ImuSample> read_imu_csv(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path, {"t", "ax", "ay", "az", "wx", "wy", "wz"});
  std::vector<ImuSample> out;
  out.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    ImuSample s;
    s.t = row[0];
    s.acc = Vec3(row[1], row[2], row[3]);
    s.gyro = Vec3(row[4], row[5], row[6]);
    if (!out.empty() && !(s.t > out.back().t)) {
      throw ParseError(path.string(), table.line_numbers[i], "IMU timestamps must be strictly increasing");
    }
    out.push_back(s);
  }
  return out;
}

void write_imu_csv(const std::filesystem::path& path, std::span<const ImuSample> samples) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << "t,ax,ay,az,wx,wy,wz\n";
  for (const auto& s : samples) {
    os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", s.t, s.acc.x(),
                      s.acc.y(), s.acc.z(), s.gyro.x(), s.gyro.y(), s.gyro.z());
  }
}

}  // namespace ringlio

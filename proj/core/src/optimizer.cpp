#include "ringlio/optimizer.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <fmt/format.h>

#include "ringlio/errors.hpp"

namespace ringlio {

namespace si = state_index;
namespace pi = pim_index;

using Mat15 = Eigen::Matrix<double, 15, 15>;
using MatX = Eigen::MatrixXd;
using VecX = Eigen::VectorXd;

void WindowProblem::validate() const {
  const std::size_t n = states.size();
  std::vector<int> consecutive(n > 0 ? n - 1 : 0, 0);
  for (const auto& c : pims) {
    if (c.i >= c.j || c.j >= n) {
      throw DomainError(fmt::format("WindowProblem: invalid PIM constraint ({}, {}) for {} states", c.i, c.j, n));
    }
    if (c.j == c.i + 1) ++consecutive[c.i];
  }
  for (const auto& c : lidar) {
    if (c.i >= c.j || c.j >= n) {
      throw DomainError(fmt::format("WindowProblem: invalid LiDAR constraint ({}, {}) for {} states", c.i, c.j, n));
    }
  }
  for (std::size_t k = 0; k < consecutive.size(); ++k) {
    if (consecutive[k] != 1) {
      throw DomainError(fmt::format("WindowProblem: states {} and {} need exactly one PIM constraint (have {})", k,
                                    k + 1, consecutive[k]));
    }
  }
}

Vec15 pim_residual(const ImuState& xi, const ImuState& xj, const Pim& pim, const Vec3& gravity,
                   ResidualJacobians<15>* jac) {
  const Vec3 dba = xi.ba - pim.ba_lin;
  const Vec3 dbg = xi.bg - pim.bg_lin;
  const Pim c = pim_correct_bias(pim, dba, dbg);
  const double T = pim.delta_t;
  const Mat3 ri = xi.q.to_rotation_matrix();

  const Vec3 w = xj.p - xi.p - xi.v * T + 0.5 * gravity * T * T;
  const Vec3 a = ri.transpose() * w;
  const UnitQuaternion e = xj.q.inverse() * xi.q * c.delta_q;

  Vec15 r;
  r.segment<3>(si::kP) = c.delta_p - a;
  r.segment<3>(si::kV) = xi.v - gravity * T + ri * c.delta_v - xj.v;
  r.segment<3>(si::kTheta) = so3_log(e);
  r.segment<3>(si::kBa) = xj.ba - xi.ba;
  r.segment<3>(si::kBg) = xj.bg - xi.bg;

  if (jac) {
    const auto& bj = pim.bias_jacobian;
    const Mat3 jr_inv = so3_right_jacobian_inverse(r.segment<3>(si::kTheta));
    const Mat3 dq_dbg = bj.block<3, 3>(pi::kTheta, pi::kBg);
    const Mat3 corrected_rot = c.delta_q.to_rotation_matrix();

    auto& di = jac->d_xi;
    auto& dj = jac->d_xj;
    di.setZero();
    dj.setZero();

    di.block<3, 3>(si::kP, si::kP) = ri.transpose();
    di.block<3, 3>(si::kP, si::kV) = ri.transpose() * T;
    di.block<3, 3>(si::kP, si::kTheta) = -skew(a);
    di.block<3, 3>(si::kP, si::kBa) = bj.block<3, 3>(pi::kP, pi::kBa);
    di.block<3, 3>(si::kP, si::kBg) = bj.block<3, 3>(pi::kP, pi::kBg);
    dj.block<3, 3>(si::kP, si::kP) = -ri.transpose();

    di.block<3, 3>(si::kV, si::kV) = Mat3::Identity();
    di.block<3, 3>(si::kV, si::kTheta) = -ri * skew(c.delta_v);
    di.block<3, 3>(si::kV, si::kBa) = ri * bj.block<3, 3>(pi::kV, pi::kBa);
    di.block<3, 3>(si::kV, si::kBg) = ri * bj.block<3, 3>(pi::kV, pi::kBg);
    dj.block<3, 3>(si::kV, si::kV) = -Mat3::Identity();

    di.block<3, 3>(si::kTheta, si::kTheta) = jr_inv * corrected_rot.transpose();
    di.block<3, 3>(si::kTheta, si::kBg) = jr_inv * so3_right_jacobian(dq_dbg * dbg) * dq_dbg;
    dj.block<3, 3>(si::kTheta, si::kTheta) = -jr_inv * e.to_rotation_matrix().transpose();

    di.block<3, 3>(si::kBa, si::kBa) = -Mat3::Identity();
    dj.block<3, 3>(si::kBa, si::kBa) = Mat3::Identity();
    di.block<3, 3>(si::kBg, si::kBg) = -Mat3::Identity();
    dj.block<3, 3>(si::kBg, si::kBg) = Mat3::Identity();
  }
  return r;
}

PoseSE3 predicted_lidar_motion(const ImuState& xi, const ImuState& xj, const Extrinsics& ext) {
  const PoseSE3 t_il = ext.T_IL();
  return between(xi.pose() * t_il, xj.pose() * t_il);
}

namespace {

// Hamilton product of raw 4-vectors (wxyz), no normalization or sign change.
Vec4 raw_product(const Vec4& a, const Vec4& b) {
  return {a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
          a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
          a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
          a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0]};
}

Mat4 right_matrix(const Vec4& q) {
  Mat4 m;
  m << q[0], -q[1], -q[2], -q[3],
       q[1], q[0], q[3], -q[2],
       q[2], -q[3], q[0], q[1],
       q[3], q[2], -q[1], q[0];
  return m;
}

}  // namespace

Vec6 pose_residual(const ImuState& xi, const ImuState& xj, const PoseSE3& measured, const Extrinsics& ext,
                   ResidualJacobians<6>* jac) {
  const Mat3 ri = xi.q.to_rotation_matrix();
  const Mat3 rj = xj.q.to_rotation_matrix();
  const Mat3 ril = ext.q_IL.to_rotation_matrix();

  const Vec3 d = xj.p + rj * ext.p_IL - xi.p;
  const Vec3 p_hat = ril.transpose() * (ri.transpose() * d) - ril.transpose() * ext.p_IL;
  const UnitQuaternion q_hat = (xi.q * ext.q_IL).inverse() * (xj.q * ext.q_IL);

  const Vec4 e = raw_product(q_hat.inverse().wxyz(), measured.rotation.wxyz());
  const double sign = e[0] < 0.0 ? -1.0 : 1.0;

  Vec6 r;
  r.head<3>() = measured.translation - p_hat;
  r.tail<3>() = 2.0 * sign * e.tail<3>();

  if (jac) {
    auto& di = jac->d_xi;
    auto& dj = jac->d_xj;
    di.setZero();
    dj.setZero();
    const Mat3 a = ril.transpose() * ri.transpose();

    di.block<3, 3>(0, si::kP) = a;
    di.block<3, 3>(0, si::kTheta) = -ril.transpose() * skew(ri.transpose() * d);
    dj.block<3, 3>(0, si::kP) = -a;
    dj.block<3, 3>(0, si::kTheta) = a * rj * skew(ext.p_IL);

    const Mat4 lr = quat_left_matrix(q_hat.inverse()) * quat_right_matrix(measured.rotation);
    di.block<3, 3>(3, si::kTheta) = sign * lr.block<3, 3>(1, 1) * ril.transpose();
    dj.block<3, 3>(3, si::kTheta) = -sign * right_matrix(e).block<3, 3>(1, 1) * ril.transpose();
  }
  return r;
}

ProblemWhitening make_whitening(const WindowProblem& problem) {
  ProblemWhitening w;
  const auto& wt = problem.weights;
  w.pim.reserve(problem.pims.size());
  for (const auto& c : problem.pims) {
    const Mat3 ri = problem.states[c.i].q.to_rotation_matrix();
    Eigen::Matrix<double, 9, 9> m = Eigen::Matrix<double, 9, 9>::Identity();
    m.block<3, 3>(pi::kV, pi::kV) = ri;  // velocity residual lives in the world frame
    Mat15 cov = Mat15::Zero();
    cov.topLeftCorner<9, 9>() = m * c.pim.cov * m.transpose();
    const double T = c.pim.delta_t;
    cov.block<3, 3>(si::kBa, si::kBa) = (wt.sigma_acc_bias.cwiseAbs2() * T).asDiagonal();
    cov.block<3, 3>(si::kBg, si::kBg) = (wt.sigma_gyro_bias.cwiseAbs2() * T).asDiagonal();
    cov.diagonal().array() += wt.covariance_floor;
    const Mat15 info = cov.ldlt().solve(Mat15::Identity());
    const Eigen::LLT<Mat15> llt(0.5 * (info + info.transpose()));
    if (llt.info() != Eigen::Success) {
      throw NumericalError(fmt::format("PIM constraint ({}, {}): covariance not positive definite", c.i, c.j));
    }
    w.pim.push_back(llt.matrixL().transpose());
  }
  w.pose = wt.pose_sigma.cwiseInverse().asDiagonal();
  return w;
}

double total_cost(const WindowProblem& problem, const ProblemWhitening& w) {
  double cost = 0.0;
  for (std::size_t k = 0; k < problem.pims.size(); ++k) {
    const auto& c = problem.pims[k];
    cost += (w.pim[k] * pim_residual(problem.states[c.i], problem.states[c.j], c.pim, problem.gravity))
                .squaredNorm();
  }
  for (const auto& c : problem.lidar) {
    cost += (w.pose * pose_residual(problem.states[c.i], problem.states[c.j], c.T_Li_Lj, problem.extrinsics))
                .squaredNorm();
  }
  return cost;
}

double total_cost(const WindowProblem& problem) { return total_cost(problem, make_whitening(problem)); }

std::string to_string(Termination t) {
  switch (t) {
    case Termination::kGradient: return "gradient";
    case Termination::kRelativeCostDecrease: return "relative_cost_decrease";
    case Termination::kStepSize: return "step_size";
    case Termination::kMaxIterations: return "max_iterations";
    case Termination::kNoProgress: return "no_progress";
  }
  return "unknown";
}

namespace {

struct Linearization {
  VecX residual;
  MatX jacobian;
};

Linearization linearize(const WindowProblem& problem, const ProblemWhitening& w) {
  const std::size_t n_free = problem.states.size() - 1;
  const Eigen::Index rows = static_cast<Eigen::Index>(15 * problem.pims.size() + 6 * problem.lidar.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(15 * n_free);
  Linearization lin;
  lin.residual = VecX::Zero(rows);
  lin.jacobian = MatX::Zero(rows, cols);

  auto place = [&](Eigen::Index row, std::size_t state, const auto& block) {
    if (state == 0) return;  // fixed anchor
    lin.jacobian.block(row, static_cast<Eigen::Index>(15 * (state - 1)), block.rows(), 15) = block;
  };

  Eigen::Index row = 0;
  for (std::size_t k = 0; k < problem.pims.size(); ++k) {
    const auto& c = problem.pims[k];
    ResidualJacobians<15> j;
    const Vec15 r = pim_residual(problem.states[c.i], problem.states[c.j], c.pim, problem.gravity, &j);
    if (!r.allFinite() || !j.d_xi.allFinite() || !j.d_xj.allFinite()) {
      throw NumericalError(fmt::format("non-finite PIM residual or Jacobian in constraint ({}, {})", c.i, c.j));
    }
    lin.residual.segment<15>(row) = w.pim[k] * r;
    place(row, c.i, (w.pim[k] * j.d_xi).eval());
    place(row, c.j, (w.pim[k] * j.d_xj).eval());
    row += 15;
  }
  for (const auto& c : problem.lidar) {
    ResidualJacobians<6> j;
    const Vec6 r = pose_residual(problem.states[c.i], problem.states[c.j], c.T_Li_Lj, problem.extrinsics, &j);
    if (!r.allFinite() || !j.d_xi.allFinite() || !j.d_xj.allFinite()) {
      throw NumericalError(fmt::format("non-finite LiDAR residual or Jacobian in constraint ({}, {})", c.i, c.j));
    }
    lin.residual.segment<6>(row) = w.pose * r;
    place(row, c.i, (w.pose * j.d_xi).eval());
    place(row, c.j, (w.pose * j.d_xj).eval());
    row += 6;
  }
  return lin;
}

double free_state_norm(const std::vector<ImuState>& states) {
  double sq = 0.0;
  for (std::size_t k = 1; k < states.size(); ++k) {
    const ImuState& s = states[k];
    sq += s.p.squaredNorm() + s.v.squaredNorm() + s.ba.squaredNorm() + s.bg.squaredNorm();
  }
  return std::sqrt(sq);
}

std::vector<ImuState> retract(const std::vector<ImuState>& states, const VecX& delta) {
  std::vector<ImuState> out = states;
  for (std::size_t k = 1; k < out.size(); ++k) {
    const auto d = delta.segment<15>(static_cast<Eigen::Index>(15 * (k - 1)));
    ImuState& s = out[k];
    s.p += d.segment<3>(si::kP);
    s.v += d.segment<3>(si::kV);
    s.q = s.q * so3_exp(d.segment<3>(si::kTheta));
    s.ba += d.segment<3>(si::kBa);
    s.bg += d.segment<3>(si::kBg);
  }
  return out;
}

}  // namespace

WindowSolution optimize_window(const WindowProblem& problem, const OptimizerOptions& options) {
  if (problem.states.size() < 2) throw DomainError("optimize_window: need at least two states");
  problem.validate();

  const ProblemWhitening whitening = make_whitening(problem);
  WindowProblem work = problem;
  WindowSolution sol;
  OptimizerReport& rep = sol.report;

  Linearization lin = linearize(work, whitening);
  double cost = lin.residual.squaredNorm();
  if (!std::isfinite(cost)) throw NumericalError("optimize_window: non-finite initial cost");
  rep.initial_cost = cost;
  rep.cost_history.push_back(cost);

  double lambda = options.initial_lambda;
  rep.termination = Termination::kMaxIterations;
  while (rep.iterations < options.max_iterations) {
    const VecX g = lin.jacobian.transpose() * lin.residual;
    if (g.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) {
      rep.termination = Termination::kGradient;
      break;
    }
    const MatX h = lin.jacobian.transpose() * lin.jacobian;
    MatX damped = h;
    damped.diagonal() += lambda * h.diagonal().cwiseMax(1e-12);
    const VecX delta = damped.ldlt().solve(-g);
    ++rep.iterations;
    if (!delta.allFinite()) {
      lambda *= options.lambda_up;
      continue;
    }
    const double tol = options.step_tolerance;
    if (delta.norm() <= tol * (free_state_norm(work.states) + tol)) {
      rep.termination = Termination::kStepSize;
      break;
    }

    WindowProblem trial = work;
    trial.states = retract(work.states, delta);
    const double trial_cost = total_cost(trial, whitening);
    if (!std::isfinite(trial_cost)) {
      lambda *= options.lambda_up;
      continue;
    }
    if (trial_cost < cost) {
      const double rel = (cost - trial_cost) / cost;
      work = std::move(trial);
      cost = trial_cost;
      ++rep.accepted_steps;
      rep.cost_history.push_back(cost);
      lambda = std::max(lambda * options.lambda_down, 1e-12);
      if (rel < options.relative_cost_tolerance) {
        rep.termination = Termination::kRelativeCostDecrease;
        break;
      }
      lin = linearize(work, whitening);
    } else {
      lambda *= options.lambda_up;
      if (lambda > 1e16) {
        rep.termination = Termination::kNoProgress;
        break;
      }
    }
  }
  rep.final_cost = cost;
  sol.states = std::move(work.states);
  return sol;
}

ImuState update_after_optimization(const ImuState& anchor, std::span<const ImuSample> samples,
                                   const NoiseParams& noise) {
  ImuState x = anchor;
  if (samples.empty()) return x;
  constexpr double kSameTime = 1e-12;
  if (samples[0].t > anchor.t + kSameTime) x = propagate_state(x, samples[0], samples[0].t - anchor.t, noise);
  for (std::size_t k = 1; k < samples.size(); ++k) x = propagate_state(x, samples[k - 1], samples[k], noise);
  return x;
}

}  // namespace ringlio

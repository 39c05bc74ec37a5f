#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ringlio/geometry.hpp"
#include "ringlio/imu.hpp"
#include "ringlio/preintegration.hpp"

namespace ringlio {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec15 = Eigen::Matrix<double, 15, 1>;
using Mat6x15 = Eigen::Matrix<double, 6, 15>;

/// Fixed LiDAR -> IMU transform (q^I_L, p^I_L).
struct Extrinsics {
  UnitQuaternion q_IL;
  Vec3 p_IL = Vec3::Zero();

  PoseSE3 T_IL() const { return {q_IL, p_IL}; }
};

struct PimConstraint {
  std::size_t i = 0;
  std::size_t j = 0;
  Pim pim;
};

/// Measured pose of LiDAR frame j expressed in LiDAR frame i.
struct LidarConstraint {
  std::size_t i = 0;
  std::size_t j = 0;
  PoseSE3 T_Li_Lj;
};

struct WindowWeights {
  /// Standard deviations of the LiDAR relative pose (tx, ty, tz, rx, ry, rz).
  Vec6 pose_sigma = (Vec6() << 0.02, 0.02, 0.02, 0.01, 0.01, 0.01).finished();
  /// Bias random-walk densities; the bias residual of a constraint spanning T
  /// seconds has standard deviation sigma * sqrt(T).
  Vec3 sigma_acc_bias = Vec3::Constant(1e-4);
  Vec3 sigma_gyro_bias = Vec3::Constant(1e-5);
  /// Variance added to every diagonal entry of the PIM and bias covariances so
  /// noise-free problems stay invertible.
  double covariance_floor = 1e-12;
};

/// States at consecutive LiDAR timestamps plus the constraints between them.
/// State 0 is held fixed to anchor the gauge.
struct WindowProblem {
  std::vector<ImuState> states;
  std::vector<PimConstraint> pims;
  std::vector<LidarConstraint> lidar;
  Extrinsics extrinsics;
  Vec3 gravity = Vec3(0.0, 0.0, 9.81);
  WindowWeights weights;

  /// Throws DomainError on dangling indices, i >= j, or a consecutive pair
  /// without exactly one PIM constraint.
  void validate() const;
};

/// d(residual) / d(error state of x_i) and d/d(x_j), error state (dp, dv, dtheta, dba, dbg).
template <int Rows>
struct ResidualJacobians {
  Eigen::Matrix<double, Rows, 15> d_xi;
  Eigen::Matrix<double, Rows, 15> d_xj;
};

/// (dp, dv, dtheta, dba, dbg). The increment is first moved to x_i's biases
/// through its Jacobians; dp is in the frame of x_i, dv in the world frame,
/// dtheta = Log(q_j^-1 * q_i * dR), bias rows are b_j - b_i.
Vec15 pim_residual(const ImuState& xi, const ImuState& xj, const Pim& pim, const Vec3& gravity,
                   ResidualJacobians<15>* jacobians = nullptr);

/// (translation, rotation) error between the measured LiDAR relative pose and
/// the one induced by the two IMU states and the extrinsics.
Vec6 pose_residual(const ImuState& xi, const ImuState& xj, const PoseSE3& measured,
                   const Extrinsics& extrinsics, ResidualJacobians<6>* jacobians = nullptr);

/// Relative LiDAR pose implied by two IMU states: (T_w_Ii T_IL)^-1 (T_w_Ij T_IL).
PoseSE3 predicted_lidar_motion(const ImuState& xi, const ImuState& xj, const Extrinsics& extrinsics);

/// Whitening matrices, evaluated once per problem at its current states.
struct ProblemWhitening {
  std::vector<Eigen::Matrix<double, 15, 15>> pim;
  Eigen::Matrix<double, 6, 6> pose = Eigen::Matrix<double, 6, 6>::Identity();
};
ProblemWhitening make_whitening(const WindowProblem& problem);

/// Sum of squared whitened residuals.
double total_cost(const WindowProblem& problem);
double total_cost(const WindowProblem& problem, const ProblemWhitening& whitening);

struct OptimizerOptions {
  int max_iterations = 100;
  double relative_cost_tolerance = 1e-9;
  double gradient_tolerance = 1e-10;
  /// Stop once a proposed step satisfies |dx| <= tol * (|x| + tol), x being the
  /// stacked free positions, velocities and biases.
  double step_tolerance = 1e-10;
  double initial_lambda = 1e-4;
  double lambda_up = 10.0;
  double lambda_down = 0.5;
};

enum class Termination { kGradient, kRelativeCostDecrease, kStepSize, kMaxIterations, kNoProgress };

std::string to_string(Termination t);

struct OptimizerReport {
  int iterations = 0;
  int accepted_steps = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  Termination termination = Termination::kMaxIterations;
  /// Cost after each accepted step, starting with the initial cost.
  std::vector<double> cost_history;
};

struct WindowSolution {
  std::vector<ImuState> states;
  OptimizerReport report;
};

/// Levenberg-Marquardt on the state manifold (additive for p, v, biases;
/// right-multiplied Exp for rotation). State 0 stays fixed.
WindowSolution optimize_window(const WindowProblem& problem, const OptimizerOptions& options = {});

/// Re-propagates the optimized anchor through samples that arrived after it.
/// `samples` may start with a sample at the anchor time; a first sample later
/// than the anchor is held constant back to the anchor time.
ImuState update_after_optimization(const ImuState& anchor, std::span<const ImuSample> samples,
                                   const NoiseParams& noise);

}  // namespace ringlio

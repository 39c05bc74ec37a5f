#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "ringlio/geometry.hpp"

namespace ringlio {

struct StampedPose {
  double t = 0.0;
  PoseSE3 pose;
};

/// Time-ordered poses; timestamps strictly increase.
using Trajectory = std::vector<StampedPose>;

/// Throws DomainError on non-increasing timestamps.
void validate_trajectory(const Trajectory& trajectory);

/// Text lines `t x y z qx qy qz qw`. Blank lines and lines starting with '#'
/// are skipped; malformed lines raise ParseError with the line number.
Trajectory read_trajectory(const std::filesystem::path& path);
void write_trajectory(const std::filesystem::path& path, const Trajectory& trajectory);

struct IndexPair {
  std::size_t est = 0;
  std::size_t gt = 0;
};

inline constexpr double kDefaultMaxDt = 0.02;

/// Nearest-timestamp matching within max_dt. Candidate pairs are accepted in
/// order of increasing |dt| (ties by est, then gt index), so every sample of
/// either trajectory is used at most once. Result is sorted by est index.
/// Throws EmptyAssociationError when nothing matches.
std::vector<IndexPair> associate(const Trajectory& est, const Trajectory& gt, double max_dt = kDefaultMaxDt);

/// Pose sequences restricted to the associated samples.
struct AssociatedPoses {
  std::vector<double> t;  ///< ground-truth timestamps
  std::vector<PoseSE3> est;
  std::vector<PoseSE3> gt;
};
AssociatedPoses gather(const Trajectory& est, const Trajectory& gt, std::span<const IndexPair> pairs);

struct FramePair {
  std::size_t i = 0;
  std::size_t j = 0;
};

/// All (k, k + gap) pairs for k + gap < n.
std::vector<FramePair> frame_pairs(std::size_t n, std::size_t gap);

struct RelativeError {
  double e_trans = 0.0;  ///< mean translation norm, m
  double e_rot = 0.0;    ///< mean rotation angle, rad
  std::size_t pairs = 0;
};

/// Mean over pairs of Delta = (gt_i^-1 gt_j)^-1 (est_i^-1 est_j). Throws
/// DomainError for an empty pair set or out-of-range indices.
RelativeError relative_errors(std::span<const PoseSE3> est, std::span<const PoseSE3> gt,
                              std::span<const FramePair> pairs);

inline constexpr std::size_t kDefaultGaps[] = {1, 5, 10};

struct GapError {
  std::size_t gap = 0;
  RelativeError error;
};

struct EvaluationReport {
  std::size_t associated = 0;
  std::vector<GapError> per_gap;
  RelativeError pooled;  ///< all gaps' pairs averaged together
};

/// Associates, then reports relative errors per gap and pooled.
EvaluationReport evaluate_trajectories(const Trajectory& est, const Trajectory& gt,
                                       std::span<const std::size_t> gaps = kDefaultGaps,
                                       double max_dt = kDefaultMaxDt);

/// CSV `gap,pairs,e_trans_m,e_rot_rad,e_rot_deg`, one row per gap and a final `pooled` row.
void write_metrics_csv(const std::filesystem::path& path, const EvaluationReport& report);

struct AxisError {
  double t = 0.0;
  Vec3 translation = Vec3::Zero();  ///< est - gt, world frame
  Vec3 rpy = Vec3::Zero();          ///< roll/pitch/yaw of R_est * R_gt^T
};

/// Per-sample error of associated poses, no alignment.
std::vector<AxisError> per_axis_error_series(const AssociatedPoses& poses);

/// Re-expresses est so its first pose coincides with gt's first pose:
/// est_k <- gt_0 * est_0^-1 * est_k. Used when the estimator's world frame is
/// its own starting pose.
AssociatedPoses anchor_to_first(const AssociatedPoses& poses);

/// CSV `t,dx,dy,dz,droll,dpitch,dyaw` (m, rad).
void write_error_series_csv(const std::filesystem::path& path, std::span<const AxisError> series);

/// Mean absolute value of each of the six components.
Eigen::Matrix<double, 6, 1> mean_abs_error(std::span<const AxisError> series);

}  // namespace ringlio

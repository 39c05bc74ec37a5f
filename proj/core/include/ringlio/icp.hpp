#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ringlio/geometry.hpp"
#include "ringlio/kdtree.hpp"
#include "ringlio/scan.hpp"

namespace ringlio {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

struct IcpOptions {
  int max_iterations = 50;
  /// Stop once the parameter update norm falls below this.
  double convergence_tolerance = 1e-6;
  double max_correspondence_distance = 1.0;  ///< m
  /// Pairs whose normals (source, when present, vs target) differ by more than this are dropped.
  double max_normal_angle = 45.0 * 3.14159265358979323846 / 180.0;
  /// Fraction of pairs kept after sorting by |point-to-plane residual|.
  double trim_fraction = 0.9;
  std::size_t min_correspondences = 20;
  /// Directions of the length-normalized Hessian with eigenvalue below
  /// degeneracy_ratio * max eigenvalue are frozen at their initial value.
  double degeneracy_ratio = 1e-3;
};

/// Normal-bearing target points with a spatial index.
class IcpTarget {
 public:
  IcpTarget() = default;
  IcpTarget(std::vector<Vec3> points, std::vector<Vec3> normals);
  static IcpTarget from_scan(const RingedScan& scan);

  std::size_t size() const { return normals_.size(); }
  const KdTree& tree() const { return tree_; }
  const Vec3& point(std::size_t i) const { return tree_.point(i); }
  const Vec3& normal(std::size_t i) const { return normals_[i]; }

 private:
  KdTree tree_;
  std::vector<Vec3> normals_;
};

struct IcpDiagnostics {
  int iterations = 0;  ///< accepted updates
  bool converged = false;
  double rms = 0.0;  ///< final trimmed point-to-plane RMS, m
  std::vector<double> rms_history;  ///< initial RMS followed by one entry per accepted update
  std::size_t correspondences = 0;
  double inlier_ratio = 0.0;  ///< correspondences / source points
  Mat6 hessian = Mat6::Zero();  ///< Gauss-Newton J^T J at the result, xi = (rho, phi)
  Vec6 hessian_eigenvalues = Vec6::Zero();  ///< ascending
  Mat6 hessian_eigenvectors = Mat6::Identity();
  int degenerate_directions = 0;
};

struct IcpResult {
  PoseSE3 pose;
  IcpDiagnostics diagnostics;
};

/// Point-to-plane ICP minimizing sum (n^T (T p_src - p_tgt))^2 over T, starting at T_init.
/// Throws NoOverlapError (too few correspondences) or NumericalError.
IcpResult icp_point_to_plane(std::span<const ScanPoint> source, const IcpTarget& target,
                             const PoseSE3& initial, const IcpOptions& options = {});

}  // namespace ringlio

#include "ringlio/icp.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "ringlio/errors.hpp"

namespace ringlio {

IcpTarget::IcpTarget(std::vector<Vec3> points, std::vector<Vec3> normals)
    : tree_(std::move(points)), normals_(std::move(normals)) {
  if (tree_.size() != normals_.size()) throw DomainError("IcpTarget: points/normals size mismatch");
}

IcpTarget IcpTarget::from_scan(const RingedScan& scan) {
  std::vector<Vec3> pts;
  std::vector<Vec3> nrm;
  for (const auto& p : scan.points) {
    if (!p.normal) continue;
    pts.push_back(p.xyz);
    nrm.push_back(*p.normal);
  }
  return {std::move(pts), std::move(nrm)};
}

namespace {

struct Correspondence {
  Vec3 transformed;  // T * p_src
  Vec3 normal;       // target normal
  double residual;   // n^T (T p_src - p_tgt)
};

struct Association {
  std::vector<Correspondence> pairs;
  double rms = 0.0;
};

Association associate(std::span<const ScanPoint> source, const IcpTarget& target, const PoseSE3& pose,
                      const IcpOptions& opt) {
  Association a;
  a.pairs.reserve(source.size());
  const double cos_limit = std::cos(opt.max_normal_angle);
  for (const auto& sp : source) {
    const Vec3 tp = pose.transform(sp.xyz);
    const auto nb = target.tree().nearest(tp, opt.max_correspondence_distance);
    if (!nb) continue;
    const Vec3& n = target.normal(nb->index);
    if (sp.normal && std::abs(pose.rotation.rotate(*sp.normal).dot(n)) < cos_limit) continue;
    a.pairs.push_back({tp, n, n.dot(tp - target.point(nb->index))});
  }
  const std::size_t keep = static_cast<std::size_t>(std::ceil(opt.trim_fraction * a.pairs.size()));
  if (keep < a.pairs.size()) {
    std::nth_element(a.pairs.begin(), a.pairs.begin() + static_cast<std::ptrdiff_t>(keep), a.pairs.end(),
                     [](const Correspondence& x, const Correspondence& y) {
                       return std::abs(x.residual) < std::abs(y.residual);
                     });
    a.pairs.resize(keep);
  }
  double ss = 0.0;
  for (const auto& c : a.pairs) ss += c.residual * c.residual;
  a.rms = a.pairs.empty() ? 0.0 : std::sqrt(ss / static_cast<double>(a.pairs.size()));
  return a;
}

void normal_equations(const Association& a, Mat6& h, Vec6& b) {
  h.setZero();
  b.setZero();
  for (const auto& c : a.pairs) {
    Vec6 j;
    j.head<3>() = c.normal;
    j.tail<3>() = c.transformed.cross(c.normal);
    h.noalias() += j * j.transpose();
    b.noalias() += j * c.residual;
  }
}

}  // namespace

IcpResult icp_point_to_plane(std::span<const ScanPoint> source, const IcpTarget& target,
                             const PoseSE3& initial, const IcpOptions& opt) {
  if (!is_finite(initial)) throw NumericalError("icp: non-finite initial pose");
  if (target.size() == 0) throw NoOverlapError("icp: target has no normal-bearing points");

  // Characteristic lever arm used to put rotation and translation on one scale.
  double range_sq = 0.0;
  for (const auto& sp : source) range_sq += sp.xyz.squaredNorm();
  const double lever = std::max(1.0, std::sqrt(range_sq / std::max<std::size_t>(source.size(), 1)));
  Vec6 scale;
  scale << 1.0, 1.0, 1.0, 1.0 / lever, 1.0 / lever, 1.0 / lever;

  auto check_overlap = [&](const Association& a) {
    if (a.pairs.size() < opt.min_correspondences) {
      throw NoOverlapError(fmt::format("icp: {} correspondences after rejection (need {})", a.pairs.size(),
                                       opt.min_correspondences));
    }
  };

  IcpResult result;
  IcpDiagnostics& diag = result.diagnostics;
  PoseSE3 pose = initial;
  Association current = associate(source, target, pose, opt);
  check_overlap(current);
  diag.rms_history.push_back(current.rms);

  Mat6 h;
  Vec6 b;
  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    normal_equations(current, h, b);
    const Mat6 hn = scale.asDiagonal() * h * scale.asDiagonal();
    const Vec6 bn = scale.asDiagonal() * b;
    const Eigen::SelfAdjointEigenSolver<Mat6> eig(hn);
    const Vec6 lambda = eig.eigenvalues();
    const double lambda_max = lambda[5];
    if (!std::isfinite(lambda_max) || !(lambda_max > 0.0)) throw NumericalError("icp: singular Hessian");
    Vec6 step_n = Vec6::Zero();
    for (int k = 0; k < 6; ++k) {
      if (lambda[k] <= opt.degeneracy_ratio * lambda_max) continue;
      const Vec6 v = eig.eigenvectors().col(k);
      step_n -= v * (v.dot(bn) / lambda[k]);
    }
    Vec6 step = scale.asDiagonal() * step_n;
    if (!step.allFinite()) throw NumericalError("icp: non-finite update");

    bool accepted = false;
    for (int halving = 0; halving < 4; ++halving) {
      const PoseSE3 trial = apply_left_increment(pose, step);
      Association next = associate(source, target, trial, opt);
      if (next.pairs.size() >= opt.min_correspondences && next.rms <= current.rms * (1.0 + 1e-12) + 1e-15) {
        pose = trial;
        current = std::move(next);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No step improves the fit: already at the (local) optimum.
      diag.converged = true;
      break;
    }
    ++diag.iterations;
    diag.rms_history.push_back(current.rms);
    if (step.norm() < opt.convergence_tolerance) {
      diag.converged = true;
      break;
    }
  }

  normal_equations(current, h, b);
  diag.rms = current.rms;
  diag.correspondences = current.pairs.size();
  diag.inlier_ratio = source.empty() ? 0.0 : static_cast<double>(current.pairs.size()) / source.size();
  diag.hessian = h;
  const Eigen::SelfAdjointEigenSolver<Mat6> raw(h);
  diag.hessian_eigenvalues = raw.eigenvalues();
  diag.hessian_eigenvectors = raw.eigenvectors();
  const Eigen::SelfAdjointEigenSolver<Mat6> norm(scale.asDiagonal() * h * scale.asDiagonal());
  for (int k = 0; k < 6; ++k) {
    diag.degenerate_directions += norm.eigenvalues()[k] <= opt.degeneracy_ratio * norm.eigenvalues()[5];
  }
  result.pose = pose;
  return result;
}

}  // namespace ringlio

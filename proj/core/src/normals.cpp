#include "ringlio/normals.hpp"

#include <algorithm>

#include <Eigen/Eigenvalues>

#include "ringlio/errors.hpp"
#include "ringlio/kdtree.hpp"

namespace ringlio {

RingedScan compute_normals(const RingedScan& scan, const NormalOptions& options, NormalStats* stats) {
  if (options.k < 2) throw DomainError("compute_normals: k must be at least 2");

  const int n_rings = std::max(scan.num_rings, 1);
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(n_rings));
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    const int r = scan.points[i].ring;
    if (r < 0 || r >= n_rings) throw DomainError("compute_normals: ring index out of range");
    members[static_cast<std::size_t>(r)].push_back(i);
  }
  std::vector<KdTree> trees;
  trees.reserve(members.size());
  for (const auto& ring : members) {
    std::vector<Vec3> pts;
    pts.reserve(ring.size());
    for (const auto idx : ring) pts.push_back(scan.points[idx].xyz);
    trees.emplace_back(std::move(pts));
  }

  RingedScan out = scan;
  NormalStats local;
  std::vector<Vec3> hood;
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    ScanPoint& pt = out.points[i];
    pt.normal.reset();
    const double gate =
        std::max(options.max_neighbor_distance_abs, options.max_neighbor_distance_rel * pt.xyz.norm());

    hood.clear();
    hood.push_back(pt.xyz);
    std::size_t off_ring = 0;
    for (int r = pt.ring - 1; r <= pt.ring + 1; ++r) {
      if (r < 0 || r >= n_rings) continue;
      const bool own = r == pt.ring;
      // Own ring: the query point itself comes back first.
      const auto found = trees[static_cast<std::size_t>(r)].knn(pt.xyz, options.k + (own ? 1 : 0), gate);
      for (const auto& nb : found) {
        const std::size_t idx = members[static_cast<std::size_t>(r)][nb.index];
        if (idx == i) continue;
        hood.push_back(scan.points[idx].xyz);
        off_ring += own ? 0 : 1;
      }
    }
    if (hood.size() - 1 < options.min_neighbors) {
      ++local.too_few_neighbors;
      continue;
    }

    Vec3 mean = Vec3::Zero();
    for (const auto& p : hood) mean += p;
    mean /= static_cast<double>(hood.size());
    Mat3 cov = Mat3::Zero();
    for (const auto& p : hood) cov += (p - mean) * (p - mean).transpose();
    cov /= static_cast<double>(hood.size());

    const Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    const Vec3 lambda = eig.eigenvalues();  // ascending
    // A single scan line spans no plane, however noisy it is.
    if (off_ring < options.min_off_ring_neighbors || !(lambda[2] > 0.0) ||
        lambda[1] / lambda[2] < options.min_planarity || lambda[0] > options.max_plane_rms * options.max_plane_rms) {
      ++local.line_degenerate;
      continue;
    }
    Vec3 n = eig.eigenvectors().col(0).normalized();
    if (n.dot(pt.xyz) > 0.0) n = -n;
    pt.normal = n;
    ++local.with_normal;
  }
  if (stats) *stats = local;
  return out;
}

}  // namespace ringlio

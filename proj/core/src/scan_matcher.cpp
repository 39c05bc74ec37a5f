#include "ringlio/scan_matcher.hpp"

#include <cmath>
#include <unordered_set>

#include <fmt/format.h>

#include "ringlio/errors.hpp"

namespace ringlio {

RingedScan thin_scan(const RingedScan& scan, double voxel) {
  if (!(voxel > 0.0)) return scan;
  RingedScan out;
  out.t = scan.t;
  out.num_rings = scan.num_rings;
  std::unordered_set<std::int64_t> seen;
  constexpr std::int64_t kOffset = 1 << 20;
  constexpr std::int64_t kMask = (1 << 21) - 1;
  for (const auto& p : scan.points) {
    const auto cell = [&](double v) {
      return (static_cast<std::int64_t>(std::floor(v / voxel)) + kOffset) & kMask;
    };
    const std::int64_t key = (cell(p.xyz.x()) << 42) | (cell(p.xyz.y()) << 21) | cell(p.xyz.z());
    if (seen.insert(key).second) out.points.push_back(p);
  }
  return out;
}

MatchResult match_scan(const PoseSE3& T_init, const PoseSE3& T_local_last, const RingedScan& current,
                       const IcpTarget& last_target, const IcpTarget& map_target,
                       const MatcherOptions& options) {
  MatchResult r;
  r.T_last_curr = T_init;
  r.T_local_curr = T_local_last * T_init;
  const RingedScan source = thin_scan(current, options.source_voxel);

  auto fail = [&](std::string cause) {
    r.mismatch = true;
    r.cause = std::move(cause);
    return r;
  };

  try {
    const IcpResult odo = icp_point_to_plane(source.points, last_target, T_init, options.icp);
    r.T_last_curr = odo.pose;
    r.odometry = odo.diagnostics;
    if (odo.diagnostics.inlier_ratio < options.min_inlier_ratio) {
      return fail(fmt::format("odometry inlier ratio {:.3f} below {:.3f}", odo.diagnostics.inlier_ratio,
                              options.min_inlier_ratio));
    }
  } catch (const Error& e) {
    return fail(std::string("odometry: ") + e.what());
  }

  const PoseSE3 map_init = T_local_last * r.T_last_curr;
  try {
    const IcpResult map = icp_point_to_plane(source.points, map_target, map_init, options.icp);
    r.T_local_curr = map.pose;
    r.mapping = map.diagnostics;
    r.rms = map.diagnostics.rms;
    r.iterations = map.diagnostics.iterations;
    r.converged = map.diagnostics.converged && r.odometry->converged;
    if (map.diagnostics.inlier_ratio < options.min_inlier_ratio) {
      return fail(fmt::format("mapping inlier ratio {:.3f} below {:.3f}", map.diagnostics.inlier_ratio,
                              options.min_inlier_ratio));
    }
  } catch (const Error& e) {
    return fail(std::string("mapping: ") + e.what());
  }

  const PoseSE3 diff = between(map_init, r.T_local_curr);
  const double dt = diff.translation.norm();
  const double dr = rotation_angle(diff.rotation);
  if (dt > options.mismatch_translation || dr > options.mismatch_rotation) {
    return fail(fmt::format("odometry/mapping discrepancy {:.3f} m, {:.3f} deg", dt, dr * 180.0 / 3.14159265358979323846));
  }
  return r;
}

ScanMatcher::ScanMatcher(MatcherOptions options) : options_(options), map_(options.map) {}

MatchResult ScanMatcher::process(const RingedScan& scan, const PoseSE3& T_init) {
  RingedScan current = compute_normals(scan, options_.normals);
  if (!initialized_) {
    map_.insert(current, PoseSE3::identity());
    last_scan_ = std::move(current);
    last_target_ = IcpTarget::from_scan(last_scan_);
    map_target_ = map_.make_target();
    T_local_last_ = PoseSE3::identity();
    initialized_ = true;
    MatchResult r;
    r.initialization = true;
    r.converged = true;
    return r;
  }

  MatchResult r = match_scan(T_init, T_local_last_, current, last_target_, map_target_, options_);
  if (r.mismatch) return r;

  map_.insert(current, r.T_local_curr);
  map_target_ = map_.make_target();
  last_scan_ = std::move(current);
  last_target_ = IcpTarget::from_scan(last_scan_);
  T_local_last_ = r.T_local_curr;
  return r;
}

}  // namespace ringlio

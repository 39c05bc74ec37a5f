#pragma once

#include <optional>
#include <string>

#include "ringlio/icp.hpp"
#include "ringlio/local_map.hpp"
#include "ringlio/normals.hpp"
#include "ringlio/scan.hpp"

namespace ringlio {

struct MatcherOptions {
  NormalOptions normals;
  IcpOptions icp;
  LocalMapOptions map;
  /// Skip test between T_local_last * T_last_curr and T_local_curr.
  double mismatch_translation = 0.5;                                  ///< m
  double mismatch_rotation = 5.0 * 3.14159265358979323846 / 180.0;   ///< rad
  /// Source scan is voxel-thinned to this size before ICP (0 disables).
  double source_voxel = 0.25;
  /// Minimum fraction of source points with an accepted correspondence.
  double min_inlier_ratio = 0.3;
};

struct MatchResult {
  PoseSE3 T_last_curr;
  PoseSE3 T_local_curr;
  bool converged = false;
  bool mismatch = false;
  /// True for the scan that seeded the map.
  bool initialization = false;
  double rms = 0.0;  ///< scan-to-map RMS, m
  int iterations = 0;
  std::string cause;  ///< why a mismatch was declared
  std::optional<IcpDiagnostics> odometry;
  std::optional<IcpDiagnostics> mapping;
};

/// Voxel thinning of a scan (first point per voxel wins).
RingedScan thin_scan(const RingedScan& scan, double voxel);

/// One odometry + mapping step with no side effects. `current` must already
/// carry normals. Any ICP failure becomes mismatch = true with the cause recorded.
MatchResult match_scan(const PoseSE3& T_init, const PoseSE3& T_local_last, const RingedScan& current,
                       const IcpTarget& last_target, const IcpTarget& map_target,
                       const MatcherOptions& options);

/// Stateful scan-to-scan / scan-to-map matcher. The first processed scan seeds
/// the map at identity; a mismatch leaves every buffer untouched.
class ScanMatcher {
 public:
  explicit ScanMatcher(MatcherOptions options = {});

  MatchResult process(const RingedScan& scan, const PoseSE3& T_init);

  bool initialized() const { return initialized_; }
  const LocalMap& map() const { return map_; }
  const RingedScan& last_scan() const { return last_scan_; }
  const PoseSE3& T_local_last() const { return T_local_last_; }
  const MatcherOptions& options() const { return options_; }

 private:
  MatcherOptions options_;
  bool initialized_ = false;
  LocalMap map_;
  RingedScan last_scan_;
  PoseSE3 T_local_last_;
  IcpTarget last_target_;
  IcpTarget map_target_;
};

}  // namespace ringlio

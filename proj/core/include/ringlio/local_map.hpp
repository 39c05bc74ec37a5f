#pragma once

#include <cstddef>
#include <cstdint>
#include <unordered_set>
#include <vector>

#include "ringlio/geometry.hpp"
#include "ringlio/icp.hpp"
#include "ringlio/scan.hpp"

namespace ringlio {

struct LocalMapOptions {
  double voxel_size = 0.2;    ///< m
  double crop_radius = 60.0;  ///< m
};

struct MapPoint {
  Vec3 xyz;
  Vec3 normal;

  bool operator==(const MapPoint&) const = default;
};

/// Voxel-deduplicated cloud of normal-bearing points in the local (first-scan)
/// frame. The first point to land in a voxel keeps it.
class LocalMap {
 public:
  explicit LocalMap(LocalMapOptions options = {});

  const LocalMapOptions& options() const { return options_; }
  const std::vector<MapPoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  /// Pose of the scan the map was last cropped around.
  const PoseSE3& origin() const { return origin_; }

  /// Transforms the normal-bearing points of `scan` by `scan_to_local`, merges
  /// them and crops to crop_radius around the scan position.
  void insert(const RingedScan& scan, const PoseSE3& scan_to_local);

  IcpTarget make_target() const;

  bool operator==(const LocalMap& other) const;

 private:
  std::int64_t voxel_key(const Vec3& p) const;
  void crop(const Vec3& center);

  LocalMapOptions options_;
  PoseSE3 origin_;
  std::vector<MapPoint> points_;
  std::unordered_set<std::int64_t> occupied_;
};

/// Value-returning form of LocalMap::insert.
LocalMap maintain_local_map(LocalMap map, const RingedScan& scan, const PoseSE3& scan_to_local);

}  // namespace ringlio

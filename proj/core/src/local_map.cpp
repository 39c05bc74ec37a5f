#include "ringlio/local_map.hpp"

#include <cmath>

#include "ringlio/errors.hpp"

namespace ringlio {

LocalMap::LocalMap(LocalMapOptions options) : options_(options) {
  if (!(options_.voxel_size > 0.0) || !(options_.crop_radius > 0.0)) {
    throw DomainError("LocalMap: voxel size and crop radius must be positive");
  }
}

std::int64_t LocalMap::voxel_key(const Vec3& p) const {
  // 21 bits per axis, offset so negative coordinates pack cleanly.
  constexpr std::int64_t kOffset = 1 << 20;
  constexpr std::int64_t kMask = (1 << 21) - 1;
  const auto cell = [&](double v) {
    return (static_cast<std::int64_t>(std::floor(v / options_.voxel_size)) + kOffset) & kMask;
  };
  return (cell(p.x()) << 42) | (cell(p.y()) << 21) | cell(p.z());
}

void LocalMap::insert(const RingedScan& scan, const PoseSE3& scan_to_local) {
  for (const auto& sp : scan.points) {
    if (!sp.normal) continue;
    const Vec3 p = scan_to_local.transform(sp.xyz);
    if (!occupied_.insert(voxel_key(p)).second) continue;
    points_.push_back({p, scan_to_local.rotation.rotate(*sp.normal)});
  }
  origin_ = scan_to_local;
  crop(scan_to_local.translation);
}

void LocalMap::crop(const Vec3& center) {
  const double r2 = options_.crop_radius * options_.crop_radius;
  std::vector<MapPoint> kept;
  kept.reserve(points_.size());
  for (const auto& mp : points_) {
    if ((mp.xyz - center).squaredNorm() <= r2) kept.push_back(mp);
  }
  if (kept.size() == points_.size()) return;
  points_ = std::move(kept);
  occupied_.clear();
  for (const auto& mp : points_) occupied_.insert(voxel_key(mp.xyz));
}

IcpTarget LocalMap::make_target() const {
  std::vector<Vec3> pts;
  std::vector<Vec3> nrm;
  pts.reserve(points_.size());
  nrm.reserve(points_.size());
  for (const auto& mp : points_) {
    pts.push_back(mp.xyz);
    nrm.push_back(mp.normal);
  }
  return {std::move(pts), std::move(nrm)};
}

bool LocalMap::operator==(const LocalMap& other) const {
  return points_ == other.points_ && origin_.translation == other.origin_.translation &&
         origin_.rotation.wxyz() == other.origin_.rotation.wxyz();
}

LocalMap maintain_local_map(LocalMap map, const RingedScan& scan, const PoseSE3& scan_to_local) {
  map.insert(scan, scan_to_local);
  return map;
}

}  // namespace ringlio

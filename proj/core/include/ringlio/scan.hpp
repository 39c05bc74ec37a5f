#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "ringlio/geometry.hpp"

namespace ringlio {

/// Vertical geometry of a multi-ring spinning LiDAR. Rings are numbered
/// bottom-up: ring 0 sits at min_elevation, ring N-1 at max_elevation.
struct RingModel {
  int num_rings = 16;
  double min_elevation = -15.0 * 3.14159265358979323846 / 180.0;  ///< rad
  double max_elevation = 15.0 * 3.14159265358979323846 / 180.0;   ///< rad
  /// Tolerance beyond the outermost ring centers before a point is dropped.
  double fov_margin = 0.5 * 3.14159265358979323846 / 180.0;

  double ring_spacing() const;
  double ring_elevation(int ring) const;
  /// Nearest ring for an elevation angle, or nullopt outside FOV + margin.
  std::optional<int> ring_for_elevation(double elevation) const;
};

struct RawPoint {
  Vec3 xyz = Vec3::Zero();
  std::optional<int> ring;  ///< channel reported by the sensor, if any
};

struct ScanPoint {
  Vec3 xyz = Vec3::Zero();
  int ring = 0;
  std::optional<Vec3> normal;  ///< unit normal in the scan frame, if estimable
};

struct RingedScan {
  double t = 0.0;
  int num_rings = 16;
  std::vector<ScanPoint> points;

  std::size_t normal_count() const;
};

struct RingAssignment {
  RingedScan scan;
  std::size_t dropped = 0;  ///< points outside the vertical FOV (or invalid channel)
};

/// Casts points into rings: the reported channel when present, otherwise the
/// nearest ring center by elevation angle.
RingAssignment assign_rings(std::span<const RawPoint> raw, const RingModel& model, double t);

/// Elevation angle of a point seen from the sensor origin.
double elevation_of(const Vec3& p);

/// Scan files: `x,y,z,ring` with a header; the file stem is the timestamp in ns.
RingedScan read_scan_csv(const std::filesystem::path& path, int num_rings);
void write_scan_csv(const std::filesystem::path& path, const RingedScan& scan);
std::int64_t seconds_to_ns(double t);
double ns_to_seconds(std::int64_t ns);
std::int64_t scan_timestamp_from_filename(const std::filesystem::path& path);

}  // namespace ringlio

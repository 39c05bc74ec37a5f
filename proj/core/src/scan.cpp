#include "ringlio/scan.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "ringlio/errors.hpp"
#include "ringlio/text_io.hpp"

namespace ringlio {

double RingModel::ring_spacing() const {
  return num_rings > 1 ? (max_elevation - min_elevation) / (num_rings - 1) : 0.0;
}

double RingModel::ring_elevation(int ring) const { return min_elevation + ring * ring_spacing(); }

std::optional<int> RingModel::ring_for_elevation(double elevation) const {
  if (elevation < min_elevation - fov_margin || elevation > max_elevation + fov_margin) {
    return std::nullopt;
  }
  if (num_rings < 2) return 0;
  const long r = std::lround((elevation - min_elevation) / ring_spacing());
  return static_cast<int>(std::clamp<long>(r, 0, num_rings - 1));
}

std::size_t RingedScan::normal_count() const {
  std::size_t n = 0;
  for (const auto& p : points) n += p.normal.has_value();
  return n;
}

double elevation_of(const Vec3& p) { return std::atan2(p.z(), std::hypot(p.x(), p.y())); }

RingAssignment assign_rings(std::span<const RawPoint> raw, const RingModel& model, double t) {
  if (raw.empty()) throw DomainError("assign_rings: empty scan");
  RingAssignment out;
  out.scan.t = t;
  out.scan.num_rings = model.num_rings;
  out.scan.points.reserve(raw.size());
  for (const auto& rp : raw) {
    std::optional<int> ring;
    if (rp.ring) {
      if (*rp.ring >= 0 && *rp.ring < model.num_rings) ring = rp.ring;
    } else {
      ring = model.ring_for_elevation(elevation_of(rp.xyz));
    }
    if (!ring || !rp.xyz.allFinite()) {
      ++out.dropped;
      continue;
    }
    out.scan.points.push_back({rp.xyz, *ring, std::nullopt});
  }
  return out;
}

std::int64_t seconds_to_ns(double t) { return std::llround(t * 1e9); }

double ns_to_seconds(std::int64_t ns) {
  // Split to keep sub-ns precision for large timestamps.
  const std::int64_t whole = ns / 1000000000;
  const std::int64_t frac = ns % 1000000000;
  return static_cast<double>(whole) + static_cast<double>(frac) * 1e-9;
}

std::int64_t scan_timestamp_from_filename(const std::filesystem::path& path) {
  const std::string stem = path.stem().string();
  std::int64_t ns = 0;
  const auto [ptr, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), ns);
  if (ec != std::errc() || ptr != stem.data() + stem.size()) {
    throw ParseError(path.string(), 0, "scan file name must be the timestamp in nanoseconds");
  }
  return ns;
}

RingedScan read_scan_csv(const std::filesystem::path& path, int num_rings) {
  const CsvTable table = read_csv(path, {"x", "y", "z", "ring"});
  RingedScan scan;
  scan.t = ns_to_seconds(scan_timestamp_from_filename(path));
  scan.num_rings = num_rings;
  scan.points.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const double ring = row[3];
    if (ring != std::floor(ring) || ring < 0 || ring >= num_rings) {
      throw ParseError(path.string(), table.line_numbers[i],
                       fmt::format("ring {} outside [0, {})", ring, num_rings));
    }
    scan.points.push_back({Vec3(row[0], row[1], row[2]), static_cast<int>(ring), std::nullopt});
  }
  return scan;
}

void write_scan_csv(const std::filesystem::path& path, const RingedScan& scan) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << "x,y,z,ring\n";
  for (const auto& p : scan.points) {
    os << fmt::format("{:.17g},{:.17g},{:.17g},{}\n", p.xyz.x(), p.xyz.y(), p.xyz.z(), p.ring);
  }
}

}  // namespace ringlio

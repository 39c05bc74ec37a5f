#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ringlio/evaluation.hpp"
#include "ringlio/imu.hpp"
#include "ringlio/presets.hpp"
#include "ringlio/scan.hpp"

namespace ringlio {

struct SimulationOptions {
  std::string preset = "corridor";
  Degradation degradation = Degradation::kNone;
  std::uint64_t seed = 1;
  /// Scan indices whose points are replaced by uniform clutter (fault injection).
  std::vector<std::size_t> corrupt_scans;
};

/// In-memory dataset: IMU stream, scans in time order, ground-truth IMU poses
/// at the scan times.
struct Dataset {
  std::vector<ImuSample> imu;
  std::vector<RingedScan> scans;
  Trajectory ground_truth;
};

/// Scan times are start + k / lidar rate. Scan k uses seed-derived stream k,
/// so the output depends only on (scenario, options).
Dataset simulate(const Scenario& scenario, const SimulationOptions& options);

/// Directory layout: imu.csv, scans/<t_ns>.csv, gt.txt, meta.txt.
void write_dataset(const std::filesystem::path& dir, const Dataset& dataset, const Scenario& scenario,
                   const SimulationOptions& options);

/// Reads imu.csv and scans/; gt.txt when present.
Dataset load_dataset(const std::filesystem::path& dir, int num_rings);

/// Deterministic 64-bit mix of a seed and a stream index.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace ringlio

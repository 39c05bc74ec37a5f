#include "ringlio/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "ringlio/config.hpp"
#include "ringlio/errors.hpp"

namespace ringlio {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + stream + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

constexpr std::uint64_t kImuStream = 0;
constexpr std::uint64_t kScanStreamBase = 1000;
constexpr std::uint64_t kCorruptStreamBase = 1u << 20;

void corrupt(RingedScan& scan, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (auto& p : scan.points) {
    const double x = u(rng);
    const double y = u(rng);
    const double z = u(rng);
    p.xyz = Vec3(x, y, z);
  }
}

}  // namespace

Dataset simulate(const Scenario& scenario, const SimulationOptions& options) {
  Dataset d;
  const auto imu = synth_imu(scenario.trajectory, scenario.imu_rate, scenario.imu_noise, scenario.bias,
                             derive_seed(options.seed, kImuStream));
  d.imu = imu.samples;

  const double t0 = scenario.trajectory.start_time();
  const double t1 = scenario.trajectory.end_time();
  const auto n = static_cast<std::size_t>(std::floor((t1 - t0) * scenario.lidar.rate + 1e-9)) + 1;
  const PoseSE3 t_il = scenario.extrinsics.T_IL();
  for (std::size_t k = 0; k < n; ++k) {
    const double t = t0 + static_cast<double>(k) / scenario.lidar.rate;
    const GroundTruthSample g = sample_ground_truth(scenario.trajectory, std::min(t, t1));
    RingedScan scan = synth_scan(scenario.world, g.pose * t_il, scenario.lidar, options.degradation,
                                 derive_seed(options.seed, kScanStreamBase + k), t);
    if (std::find(options.corrupt_scans.begin(), options.corrupt_scans.end(), k) != options.corrupt_scans.end()) {
      corrupt(scan, derive_seed(options.seed, kCorruptStreamBase + k));
    }
    d.scans.push_back(std::move(scan));
    d.ground_truth.push_back({t, g.pose});
  }
  return d;
}

void write_dataset(const std::filesystem::path& dir, const Dataset& dataset, const Scenario& scenario,
                   const SimulationOptions& options) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "scans");
  for (const auto& entry : fs::directory_iterator(dir / "scans")) {
    if (entry.path().extension() == ".csv") fs::remove(entry.path());
  }
  write_imu_csv(dir / "imu.csv", dataset.imu);
  for (const auto& scan : dataset.scans) {
    write_scan_csv(dir / "scans" / fmt::format("{}.csv", seconds_to_ns(scan.t)), scan);
  }
  write_trajectory(dir / "gt.txt", dataset.ground_truth);

  PipelineConfig c;
  c.noise = scenario.imu_noise;
  c.extrinsics = scenario.extrinsics;
  c.rings = scenario.lidar.rings;
  std::ofstream os(dir / "meta.txt");
  if (!os) throw Error("cannot write " + (dir / "meta.txt").string());
  constexpr double kRadToDeg = 180.0 / 3.14159265358979323846;
  os << "# ringlio simulated dataset\n";
  os << fmt::format("sim.preset = {}\n", scenario.name);
  os << fmt::format("sim.degradation = {}\n", to_string(options.degradation));
  os << fmt::format("sim.seed = {}\n", options.seed);
  std::string corrupt;
  for (const auto k : options.corrupt_scans) corrupt += fmt::format("{}{}", corrupt.empty() ? "" : " ", k);
  os << fmt::format("sim.corrupt_scans = {}\n", corrupt);
  os << fmt::format("sim.imu_rate = {:.17g}\n", scenario.imu_rate);
  os << fmt::format("sim.lidar_rate = {:.17g}\n", scenario.lidar.rate);
  os << fmt::format("sim.azimuth_step_deg = {:.17g}\n", scenario.lidar.azimuth_step * kRadToDeg);
  os << fmt::format("sim.max_range = {:.17g}\n", scenario.lidar.max_range);
  os << fmt::format("sim.range_sigma = {:.17g}\n", scenario.lidar.range_sigma);
  os << fmt::format("sim.bias_acc0 = {:.17g} {:.17g} {:.17g}\n", scenario.bias.ba0.x(), scenario.bias.ba0.y(),
                    scenario.bias.ba0.z());
  os << fmt::format("sim.bias_gyro0 = {:.17g} {:.17g} {:.17g}\n", scenario.bias.bg0.x(), scenario.bias.bg0.y(),
                    scenario.bias.bg0.z());
  const std::string cfg = format_config(c);
  std::istringstream lines(cfg);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.rfind("imu.", 0) == 0 || line.rfind("extrinsics.", 0) == 0 || line.rfind("lidar.", 0) == 0) {
      os << line << '\n';
    }
  }
}

Dataset load_dataset(const std::filesystem::path& dir, int num_rings) {
  namespace fs = std::filesystem;
  Dataset d;
  d.imu = read_imu_csv(dir / "imu.csv");
  if (!fs::is_directory(dir / "scans")) throw Error("dataset has no scans/ directory: " + dir.string());
  std::vector<std::pair<std::int64_t, fs::path>> files;
  for (const auto& entry : fs::directory_iterator(dir / "scans")) {
    if (entry.path().extension() != ".csv") continue;
    files.emplace_back(scan_timestamp_from_filename(entry.path()), entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& [ns, path] : files) d.scans.push_back(read_scan_csv(path, num_rings));
  if (fs::exists(dir / "gt.txt")) d.ground_truth = read_trajectory(dir / "gt.txt");
  return d;
}

}  // namespace ringlio

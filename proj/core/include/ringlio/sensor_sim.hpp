#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ringlio/imu.hpp"
#include "ringlio/scan.hpp"
#include "ringlio/trajectory_spec.hpp"
#include "ringlio/world.hpp"

namespace ringlio {

struct LidarModel {
  RingModel rings;
  double azimuth_step = 0.5 * 3.14159265358979323846 / 180.0;  ///< rad
  double max_range = 60.0;                                      ///< m
  double min_range = 0.3;                                       ///< m
  double range_sigma = 0.01;                                    ///< m
  double rate = 10.0;                                           ///< scans per second

  /// Throws DomainError unless rings >= 2, ranges and steps positive.
  void validate() const;
};

enum class Degradation { kNone, kVerticalClip, kHalfBlock };

std::string to_string(Degradation d);
/// Accepts "none", "vertical-clip", "half-block"; throws DomainError otherwise.
Degradation degradation_from_string(const std::string& s);

/// Returns on surfaces whose normal is within this angle of vertical count as
/// floor/ceiling for the vertical-clip mode (|n_z| > cos).
inline constexpr double kVerticalClipNormalZ = 0.9;

struct BiasSpec {
  Vec3 ba0 = Vec3::Zero();
  Vec3 bg0 = Vec3::Zero();
};

struct ImuSynthesis {
  std::vector<ImuSample> samples;
  std::vector<Vec3> ba;  ///< true accelerometer bias at each sample
  std::vector<Vec3> bg;
};

/// a_m = R^T (a_world + gravity) + b_a + n_a, w_m = w_body + b_g + n_w, biases
/// following seeded random walks. Samples at start_time + k / rate.
ImuSynthesis synth_imu(const TrajectorySpec& trajectory, double rate, const NoiseParams& noise,
                       const BiasSpec& bias, std::uint64_t seed);

/// Instantaneous scan from `sensor_pose` (LiDAR -> world). Points are expressed
/// in the LiDAR frame. Throws DomainError if the sensor sits inside geometry.
RingedScan synth_scan(const World& world, const PoseSE3& sensor_pose, const LidarModel& model,
                      Degradation degradation, std::uint64_t seed, double t = 0.0);

}  // namespace ringlio

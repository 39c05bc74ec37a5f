#pragma once

#include <string>
#include <vector>

#include "ringlio/optimizer.hpp"
#include "ringlio/sensor_sim.hpp"
#include "ringlio/trajectory_spec.hpp"
#include "ringlio/world.hpp"

namespace ringlio {

/// World, IMU trajectory and sensor setup for one simulated dataset.
struct Scenario {
  std::string name;
  World world;
  TrajectorySpec trajectory;
  LidarModel lidar;
  Extrinsics extrinsics;
  NoiseParams imu_noise;
  BiasSpec bias;
  double imu_rate = 200.0;
  Degradation degradation = Degradation::kNone;
};

/// "room", "corridor", "staircase" or "outdoor-turn". Throws DomainError otherwise.
Scenario make_preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace ringlio

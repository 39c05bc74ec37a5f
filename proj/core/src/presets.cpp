#include "ringlio/presets.hpp"

#include <cmath>

#include <fmt/format.h>

#include "ringlio/errors.hpp"

namespace ringlio {

namespace {

constexpr double kPi = 3.14159265358979323846;

Box solid_box(const Vec3& center, const Vec3& half, double yaw = 0.0) {
  return Box{PoseSE3{quat_from_rpy(0.0, 0.0, yaw), center}, half, false};
}

Box shell(const Vec3& center, const Vec3& half) { return Box{PoseSE3{UnitQuaternion(), center}, half, true}; }

/// IMU noise of the simulated unit; lower than the library defaults so a few
/// seconds of standstill pin the vertical accelerometer bias.
NoiseParams simulated_imu_noise() {
  NoiseParams n;
  n.sigma_acc = Vec3::Constant(2e-4);
  n.sigma_acc_bias = Vec3::Constant(1e-5);
  n.sigma_gyro = Vec3::Constant(5e-5);
  n.sigma_gyro_bias = Vec3::Constant(1e-6);
  return n;
}

Scenario base_scenario(const std::string& name, TrajectorySpec trajectory) {
  Scenario s{name, World{}, std::move(trajectory), LidarModel{}, Extrinsics{}, simulated_imu_noise(), BiasSpec{}};
  s.extrinsics.p_IL = Vec3(0.1, 0.0, 0.05);
  s.bias.ba0 = Vec3(0.01, -0.008, 0.006);
  s.bias.bg0 = Vec3(0.002, -0.001, 0.0015);
  return s;
}

Scenario room() {
  std::vector<Waypoint> wps;
  const int n = 16;
  for (int k = 0; k <= n; ++k) {
    const double a = 1.5 * kPi * k / n;
    Waypoint w;
    w.t = 2.0 + 1.0 * k;
    w.position = Vec3(2.5 * std::cos(a), 2.5 * std::sin(a), 1.0 + 0.2 * std::sin(0.8 * k));
    w.rpy = Vec3(0.03 * std::sin(0.7 * k), 0.03 * std::cos(0.9 * k), a + 0.5 * kPi);
    wps.push_back(w);
  }
  Scenario s = base_scenario("room", TrajectorySpec(std::move(wps), 2.0, 0.5));
  s.world.add(shell(Vec3(0.0, 0.0, 1.5), Vec3(6.0, 4.0, 1.5)));
  s.world.add(solid_box(Vec3(0.0, 0.0, 0.75), Vec3(0.6, 0.6, 0.75)));
  s.world.add(solid_box(Vec3(4.5, 2.5, 0.5), Vec3(0.5, 0.5, 0.5)));
  s.world.add(solid_box(Vec3(-3.5, 2.5, 1.0), Vec3(0.4, 0.8, 1.0), 0.4));
  s.world.add(Cylinder{Vec3(-4.0, -2.5, 0.0), 0.4, 2.0});
  s.world.add(Cylinder{Vec3(3.5, -2.8, 0.0), 0.3, 3.0});
  return s;
}

Scenario corridor() {
  // 40 m down a 2 m wide, 2.5 m tall corridor with pillars alternating sides
  // and a vertical oscillation the walls cannot observe.
  std::vector<Waypoint> wps;
  const int n = 25;
  for (int k = 0; k <= n; ++k) {
    Waypoint w;
    w.t = 2.0 + 1.0 * k;
    const double tau = 1.0 * k;
    const double env = std::sin(kPi * k / n);  // fade lateral motion at the ends
    w.position = Vec3(40.0 * k / n, 0.2 * env * std::sin(2.0 * kPi * tau / 9.0),
                      1.0 + 0.45 * env * std::sin(2.0 * kPi * tau / 6.0));
    w.rpy = Vec3(0.03 * env * std::sin(2.0 * kPi * tau / 5.0), 0.03 * env * std::sin(2.0 * kPi * tau / 4.0),
                 0.1 * env * std::sin(2.0 * kPi * tau / 7.0));
    wps.push_back(w);
  }
  Scenario s = base_scenario("corridor", TrajectorySpec(std::move(wps), 2.0, 0.5));
  s.world.add(shell(Vec3(30.0, 0.0, 1.25), Vec3(35.0, 1.0, 1.25)));
  for (int k = 0; k < 22; ++k) {
    const double side = (k % 2 == 0) ? 1.0 : -1.0;
    s.world.add(solid_box(Vec3(-2.0 + 3.0 * k, side * 0.85, 1.25), Vec3(0.15, 0.15, 1.25)));
  }
  return s;
}

Scenario staircase() {
  std::vector<Waypoint> wps;
  const std::vector<Vec3> path = {{0.0, 0.0, 1.0}, {1.0, 0.0, 1.0},   {2.0, 0.0, 1.1},  {3.0, 0.1, 1.6},
                                  {4.0, 0.0, 2.1}, {5.0, -0.1, 2.6}, {6.0, 0.0, 3.0},  {7.5, 0.0, 3.0},
                                  {9.0, 0.1, 3.0}, {10.0, 0.0, 3.0}};
  for (std::size_t k = 0; k < path.size(); ++k) {
    Waypoint w;
    w.t = 2.0 + 1.5 * static_cast<double>(k);
    w.position = path[k];
    w.rpy = Vec3(0.0, -0.1 * std::sin(0.5 * static_cast<double>(k)), 0.05 * std::sin(0.9 * static_cast<double>(k)));
    wps.push_back(w);
  }
  Scenario s = base_scenario("staircase", TrajectorySpec(std::move(wps), 2.0, 0.5));
  s.world.add(shell(Vec3(5.0, 0.0, 2.0), Vec3(7.0, 1.5, 2.0)));
  for (int k = 0; k < 10; ++k) {
    const double h = 0.2 * (k + 1);
    s.world.add(solid_box(Vec3(2.2 + 0.4 * k, 0.0, 0.5 * h), Vec3(0.2, 1.5, 0.5 * h)));
  }
  s.world.add(solid_box(Vec3(9.0, 0.0, 1.0), Vec3(3.0, 1.5, 1.0)));
  return s;
}

Scenario outdoor_turn() {
  std::vector<Waypoint> wps;
  auto add = [&](double t, double x, double y, double yaw) {
    Waypoint w;
    w.t = t;
    w.position = Vec3(x, y, 1.5);
    w.rpy = Vec3(0.0, 0.0, yaw);
    wps.push_back(w);
  };
  add(2.0, 0.0, 0.0, 0.0);
  add(6.0, 8.0, 0.0, 0.0);
  add(10.0, 18.0, 0.0, 0.0);
  add(13.0, 24.0, 0.5, 0.2);
  add(15.0, 28.0, 2.5, 0.8);
  add(17.0, 30.0, 6.0, 1.4);
  add(19.0, 30.5, 10.0, 0.5 * kPi);
  add(23.0, 30.5, 20.0, 0.5 * kPi);
  add(26.0, 30.5, 26.0, 0.5 * kPi);
  Scenario s = base_scenario("outdoor-turn", TrajectorySpec(std::move(wps), 2.0, 0.5));
  s.world.add(Plane{Vec3::Zero(), Vec3::UnitZ()});
  for (int k = 0; k < 6; ++k) {
    const double x = 2.0 + 4.5 * k;
    const double h = 3.0 + (k % 3);
    s.world.add(solid_box(Vec3(x, 7.0, 0.5 * h), Vec3(1.8, 1.2, 0.5 * h)));
    s.world.add(solid_box(Vec3(x, -7.0, 0.5 * h), Vec3(1.8, 1.2, 0.5 * h)));
  }
  for (int k = 0; k < 6; ++k) {
    const double y = 8.0 + 4.0 * k;
    const double h = 4.0 + (k % 2);
    s.world.add(solid_box(Vec3(37.0, y, 0.5 * h), Vec3(1.2, 1.6, 0.5 * h)));
    s.world.add(solid_box(Vec3(24.0, y + 4.0, 0.5 * h), Vec3(1.2, 1.6, 0.5 * h)));
  }
  s.world.add(Cylinder{Vec3(34.5, -3.0, 0.0), 0.5, 6.0});
  return s;
}

}  // namespace

std::vector<std::string> preset_names() { return {"room", "corridor", "staircase", "outdoor-turn"}; }

Scenario make_preset(const std::string& name) {
  if (name == "room") return room();
  if (name == "corridor") return corridor();
  if (name == "staircase") return staircase();
  if (name == "outdoor-turn") return outdoor_turn();
  throw DomainError(fmt::format("unknown preset '{}' (expected room, corridor, staircase, outdoor-turn)", name));
}

}  // namespace ringlio

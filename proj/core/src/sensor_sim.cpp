#include "ringlio/sensor_sim.hpp"

#include <cmath>
#include <random>

#include <fmt/format.h>

#include "ringlio/errors.hpp"

namespace ringlio {

void LidarModel::validate() const {
  if (rings.num_rings < 2) throw DomainError("LidarModel: need at least two rings");
  if (!(rings.max_elevation > rings.min_elevation)) throw DomainError("LidarModel: empty vertical FOV");
  if (!(max_range > 0.0) || !(min_range >= 0.0) || !(max_range > min_range)) {
    throw DomainError("LidarModel: invalid range limits");
  }
  if (!(azimuth_step > 0.0)) throw DomainError("LidarModel: azimuth step must be positive");
  if (!(range_sigma >= 0.0)) throw DomainError("LidarModel: negative range noise");
  if (!(rate > 0.0)) throw DomainError("LidarModel: rate must be positive");
}

std::string to_string(Degradation d) {
  switch (d) {
    case Degradation::kNone: return "none";
    case Degradation::kVerticalClip: return "vertical-clip";
    case Degradation::kHalfBlock: return "half-block";
  }
  return "none";
}

Degradation degradation_from_string(const std::string& s) {
  if (s == "none") return Degradation::kNone;
  if (s == "vertical-clip") return Degradation::kVerticalClip;
  if (s == "half-block") return Degradation::kHalfBlock;
  throw DomainError(fmt::format("unknown degradation '{}' (expected none, vertical-clip, half-block)", s));
}

ImuSynthesis synth_imu(const TrajectorySpec& trajectory, double rate, const NoiseParams& noise,
                       const BiasSpec& bias, std::uint64_t seed) {
  if (!(rate >= 50.0)) throw DomainError(fmt::format("synth_imu: rate {} Hz below 50 Hz", rate));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto gauss3 = [&]() {
    const double x = normal(rng);
    const double y = normal(rng);
    const double z = normal(rng);
    return Vec3(x, y, z);
  };

  const double dt = 1.0 / rate;
  const double sqrt_dt = std::sqrt(dt);
  const auto count = static_cast<std::size_t>(std::floor((trajectory.end_time() - trajectory.start_time()) * rate + 1e-9)) + 1;

  ImuSynthesis out;
  out.samples.reserve(count);
  out.ba.reserve(count);
  out.bg.reserve(count);
  Vec3 ba = bias.ba0;
  Vec3 bg = bias.bg0;
  for (std::size_t k = 0; k < count; ++k) {
    const double t = trajectory.start_time() + static_cast<double>(k) * dt;
    if (k > 0) {
      ba += noise.sigma_acc_bias.cwiseProduct(gauss3()) * sqrt_dt;
      bg += noise.sigma_gyro_bias.cwiseProduct(gauss3()) * sqrt_dt;
    }
    const GroundTruthSample g = sample_ground_truth(trajectory, std::min(t, trajectory.end_time()));
    const Vec3 na = noise.sigma_acc.cwiseProduct(gauss3()) / sqrt_dt;
    const Vec3 ng = noise.sigma_gyro.cwiseProduct(gauss3()) / sqrt_dt;
    ImuSample s;
    s.t = t;
    s.acc = g.pose.rotation.inverse().rotate(g.a_world + noise.gravity) + ba + na;
    s.gyro = g.omega_body + bg + ng;
    out.samples.push_back(s);
    out.ba.push_back(ba);
    out.bg.push_back(bg);
  }
  return out;
}

RingedScan synth_scan(const World& world, const PoseSE3& sensor_pose, const LidarModel& model,
                      Degradation degradation, std::uint64_t seed, double t) {
  model.validate();
  if (world.inside_solid(sensor_pose.translation)) {
    throw DomainError(fmt::format("synth_scan: sensor at ({:.3f}, {:.3f}, {:.3f}) is inside geometry",
                                  sensor_pose.translation.x(), sensor_pose.translation.y(),
                                  sensor_pose.translation.z()));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  constexpr double kPi = 3.14159265358979323846;

  const Mat3 r = sensor_pose.rotation.to_rotation_matrix();
  const auto steps = static_cast<int>(std::lround(2.0 * kPi / model.azimuth_step));

  RingedScan scan;
  scan.t = t;
  scan.num_rings = model.rings.num_rings;
  scan.points.reserve(static_cast<std::size_t>(steps * model.rings.num_rings));
  for (int ring = 0; ring < model.rings.num_rings; ++ring) {
    const double el = model.rings.ring_elevation(ring);
    for (int k = 0; k < steps; ++k) {
      const double az = -kPi + static_cast<double>(k) * 2.0 * kPi / steps;
      // Draw noise for every ray so the stream does not depend on hits.
      const double noise = model.range_sigma * normal(rng);
      if (degradation == Degradation::kHalfBlock && std::abs(az) > 0.5 * kPi) continue;
      const Vec3 dir_l(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
      const auto hit = world.cast(sensor_pose.translation, r * dir_l, model.max_range, model.min_range);
      if (!hit) continue;
      if (degradation == Degradation::kVerticalClip && std::abs(hit->normal.z()) > kVerticalClipNormalZ) continue;
      ScanPoint p;
      p.xyz = dir_l * (hit->range + noise);
      p.ring = ring;
      scan.points.push_back(p);
    }
  }
  return scan;
}

}  // namespace ringlio

#include <benchmark/benchmark.h>

#include "ringlio/icp.hpp"
#include "ringlio/normals.hpp"
#include "ringlio/presets.hpp"
#include "ringlio/scan_matcher.hpp"
#include "ringlio/sensor_sim.hpp"

namespace {

using namespace ringlio;

const RingedScan& room_scan() {
  static const RingedScan scan = [] {
    const Scenario room = make_preset("room");
    return synth_scan(room.world, PoseSE3{quat_from_rpy(0.01, 0.02, 0.4), Vec3(1.5, -1.0, 1.2)}, room.lidar,
                      Degradation::kNone, 1);
  }();
  return scan;
}

void BM_ComputeNormals(benchmark::State& state) {
  const RingedScan& scan = room_scan();
  for (auto _ : state) benchmark::DoNotOptimize(compute_normals(scan));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(scan.points.size()));
}
BENCHMARK(BM_ComputeNormals)->Unit(benchmark::kMillisecond);

void BM_IcpPointToPlane(benchmark::State& state) {
  const RingedScan target = compute_normals(room_scan());
  const IcpTarget tgt = IcpTarget::from_scan(target);
  const PoseSE3 motion{quat_from_rpy(0.0, 0.0, 0.05), Vec3(0.1, -0.05, 0.02)};
  RingedScan source = target;
  for (auto& p : source.points) {
    p.xyz = motion.transform(p.xyz);
    if (p.normal) p.normal = motion.rotation.rotate(*p.normal);
  }
  const RingedScan thinned = thin_scan(source, MatcherOptions{}.source_voxel);
  for (auto _ : state) benchmark::DoNotOptimize(icp_point_to_plane(thinned.points, tgt, PoseSE3::identity()));
  state.counters["source_points"] = static_cast<double>(thinned.points.size());
}
BENCHMARK(BM_IcpPointToPlane)->Unit(benchmark::kMillisecond);

void BM_ScanMatcherStep(benchmark::State& state) {
  const Scenario room = make_preset("room");
  auto lidar_pose = [&](double t) { return sample_ground_truth(room.trajectory, t).pose * room.extrinsics.T_IL(); };
  const RingedScan a = synth_scan(room.world, lidar_pose(2.0), room.lidar, Degradation::kNone, 1);
  const RingedScan b = synth_scan(room.world, lidar_pose(2.1), room.lidar, Degradation::kNone, 2);
  const PoseSE3 guess = between(lidar_pose(2.0), lidar_pose(2.1));
  for (auto _ : state) {
    state.PauseTiming();
    ScanMatcher m;
    m.process(a, PoseSE3::identity());
    state.ResumeTiming();
    benchmark::DoNotOptimize(m.process(b, guess));
  }
}
BENCHMARK(BM_ScanMatcherStep)->Unit(benchmark::kMillisecond);

}  // namespace

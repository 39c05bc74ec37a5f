#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "ringlio/optimizer.hpp"
#include "ringlio/preintegration.hpp"

namespace {

using namespace ringlio;

/// Smooth 200 Hz stream around a level specific force.
std::vector<ImuSample> stream(double duration) {
  std::vector<ImuSample> out;
  const NoiseParams n;
  for (int k = 0; k <= static_cast<int>(duration * 200.0); ++k) {
    const double t = k / 200.0;
    ImuSample s;
    s.t = t;
    s.acc = n.gravity + Vec3(0.3 * std::sin(1.3 * t), 0.2 * std::cos(0.7 * t), 0.1 * std::sin(2.1 * t));
    s.gyro = Vec3(0.05 * std::sin(0.9 * t), 0.04 * std::cos(1.1 * t), 0.2 * std::sin(0.5 * t));
    out.push_back(s);
  }
  return out;
}

void BM_PropagateWithCovariance(benchmark::State& state) {
  const auto s = stream(1.0);
  const NoiseParams n;
  for (auto _ : state) {
    ImuState x;
    for (std::size_t k = 0; k + 1 < s.size(); ++k) x = propagate(x, s[k], s[k + 1], n);
    benchmark::DoNotOptimize(x);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.size() - 1));
}
BENCHMARK(BM_PropagateWithCovariance);

void BM_PimIntegrate(benchmark::State& state) {
  const auto s = stream(1.0);
  const NoiseParams n;
  for (auto _ : state) {
    Pim p = Pim::at_bias(Vec3::Zero(), Vec3::Zero());
    for (std::size_t k = 0; k + 1 < s.size(); ++k) p = pim_integrate(p, s[k], s[k + 1], n);
    benchmark::DoNotOptimize(p);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.size() - 1));
}
BENCHMARK(BM_PimIntegrate);

void BM_OptimizeWindow(benchmark::State& state) {
  const auto n_states = static_cast<std::size_t>(state.range(0));
  const auto s = stream(0.25 * static_cast<double>(n_states - 1));
  const NoiseParams noise;
  WindowProblem truth;
  truth.gravity = noise.gravity;
  truth.extrinsics = Extrinsics{quat_from_rpy(0.1, -0.05, 0.2), Vec3(0.1, 0.0, 0.05)};
  ImuState x;
  truth.states.push_back(x);
  for (std::size_t i = 1; i < n_states; ++i) {
    Pim pim = Pim::at_bias(x.ba, x.bg);
    for (std::size_t k = (i - 1) * 50; k < i * 50; ++k) {
      pim = pim_integrate(pim, s[k], s[k + 1], noise);
      x = propagate_state(x, s[k], s[k + 1], noise);
    }
    truth.states.push_back(x);
    truth.pims.push_back({i - 1, i, pim});
    truth.lidar.push_back({i - 1, i, predicted_lidar_motion(truth.states[i - 1], x, truth.extrinsics)});
  }
  WindowProblem start = truth;
  for (std::size_t i = 1; i < n_states; ++i) {
    start.states[i].p += Vec3(0.1, -0.05, 0.08);
    start.states[i].q = start.states[i].q * quat_from_rpy(0.01, -0.02, 0.015);
  }
  for (auto _ : state) benchmark::DoNotOptimize(optimize_window(start));
}
BENCHMARK(BM_OptimizeWindow)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMicrosecond);

}  // namespace

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>
#include <gtest/gtest.h>

#include "ringlio/dataset.hpp"
#include "ringlio/errors.hpp"
#include "ringlio/pipeline.hpp"
#include "test_support.hpp"

namespace ringlio {
namespace {

constexpr double kDeg = 3.14159265358979323846 / 180.0;
constexpr std::size_t kScans = 45;

struct Fixture {
  Scenario scenario;
  Dataset data;
  PipelineConfig config;
};

/// Simulated dataset plus the config its meta.txt implies.
Fixture make_fixture(const std::string& preset, std::uint64_t seed, std::vector<std::size_t> corrupt = {},
                     Degradation degradation = Degradation::kNone) {
  Fixture f{make_preset(preset), {}, {}};
  SimulationOptions opts;
  opts.preset = preset;
  opts.seed = seed;
  opts.degradation = degradation;
  opts.corrupt_scans = std::move(corrupt);
  f.data = simulate(f.scenario, opts);
  test::TempDir dir("pipeline_meta");
  write_dataset(dir.path(), f.data, f.scenario, opts);
  apply_config(f.config, KeyValueFile::parse(dir.path() / "meta.txt"), "sim.");
  return f;
}

Pipeline run_prefix(const Fixture& f, std::size_t n, bool fusion = true) {
  PipelineConfig cfg = f.config;
  cfg.imu_fusion = fusion;
  Pipeline p(cfg, f.data.imu);
  for (std::size_t k = 0; k < n && k < f.data.scans.size(); ++k) p.process(f.data.scans[k]);
  p.finish();
  return p;
}

const Fixture& room() {
  static const Fixture f = make_fixture("room", 3);
  return f;
}

/// Relative pose errors against ground truth, with gaps of one scan and one second.
RelativeError drift(const Trajectory& est, const Trajectory& gt, std::size_t gap) {
  const auto pairs = associate(est, gt);
  const AssociatedPoses poses = gather(est, gt, pairs);
  return relative_errors(poses.est, poses.gt, frame_pairs(poses.est.size(), gap));
}

TEST(Pipeline, RoomRunHasNoSkipsAndTracksGroundTruth) {
  const Pipeline p = run_prefix(room(), kScans);
  const RunReport& r = p.report();
  EXPECT_TRUE(r.imu_fusion);
  EXPECT_EQ(r.skips, 0u);
  EXPECT_EQ(r.scans.size() + r.ignored_scans, kScans);
  EXPECT_EQ(r.matches + 1, r.scans.size());
  EXPECT_EQ(r.scans.front().status, ScanStatus::kInitialization);
  EXPECT_EQ(p.estimate().size(), r.scans.size());
  for (const auto& s : r.scans) EXPECT_TRUE(s.error.empty()) << s.error;

  const RelativeError step = drift(p.estimate(), room().data.ground_truth, 1);
  EXPECT_LT(step.e_trans, 0.02);
  EXPECT_LT(step.e_rot, 0.05 * kDeg);
  const RelativeError second = drift(p.estimate(), room().data.ground_truth, 10);
  EXPECT_LT(second.e_trans, 0.15);
  EXPECT_LT(second.e_rot, 0.1 * kDeg);
}

TEST(Pipeline, CorruptScanIsExactlyOneSkip) {
  const std::size_t bad = 25;
  const Fixture f = make_fixture("room", 3, {bad});
  const Pipeline p = run_prefix(f, kScans);
  const RunReport& r = p.report();
  ASSERT_EQ(r.skips, 1u);
  std::size_t skipped_at = 0;
  for (std::size_t k = 0; k < r.scans.size(); ++k) {
    if (r.scans[k].status == ScanStatus::kSkipped) skipped_at = k;
  }
  EXPECT_NEAR(r.scans[skipped_at].t, f.data.scans[bad].t, 1e-9);
  EXPECT_FALSE(r.scans[skipped_at].cause.empty());
  EXPECT_FALSE(r.scans[skipped_at].optimized);

  // The IMU bridges the skipped scan: no jump in the estimate around it.
  const Trajectory& est = p.estimate();
  ASSERT_EQ(est.size(), r.scans.size());
  const RelativeError step = drift(est, f.data.ground_truth, 1);
  EXPECT_LT(step.e_trans, 0.02);
  const auto pairs = associate(est, f.data.ground_truth);
  const AssociatedPoses poses = gather(est, f.data.ground_truth, pairs);
  for (std::size_t k = 0; k + 1 < poses.est.size(); ++k) {
    const PoseSE3 de = between(poses.est[k], poses.est[k + 1]);
    const PoseSE3 dg = between(poses.gt[k], poses.gt[k + 1]);
    EXPECT_LT(test::translation_error(de, dg), 0.03) << k;
    EXPECT_LT(test::rotation_error(de, dg), 0.2 * kDeg) << k;
  }
}

TEST(Pipeline, DeterministicAcrossRuns) {
  const Pipeline a = run_prefix(room(), 25);
  const Pipeline b = run_prefix(room(), 25);
  ASSERT_EQ(a.estimate().size(), b.estimate().size());
  for (std::size_t k = 0; k < a.estimate().size(); ++k) {
    EXPECT_EQ(a.estimate()[k].pose.translation, b.estimate()[k].pose.translation);
    EXPECT_EQ(a.estimate()[k].pose.rotation.wxyz(), b.estimate()[k].pose.rotation.wxyz());
  }
  ASSERT_EQ(a.report().scans.size(), b.report().scans.size());
  for (std::size_t k = 0; k < a.report().scans.size(); ++k) {
    EXPECT_EQ(a.report().scans[k].rms, b.report().scans[k].rms);
    EXPECT_EQ(a.report().scans[k].final_cost, b.report().scans[k].final_cost);
    EXPECT_EQ(a.report().scans[k].optimizer_iterations, b.report().scans[k].optimizer_iterations);
  }
}

TEST(Pipeline, ImuRateTrajectoryIsDenseAndMonotone) {
  const Pipeline p = run_prefix(room(), 25);
  const Trajectory& imu = p.imu_rate();
  EXPECT_NO_THROW(validate_trajectory(imu));
  const auto& scans = p.report().scans;
  const double rate_ratio = room().scenario.imu_rate / room().scenario.lidar.rate;
  // Both clocks share a grid; the shift keeps rounding at the edges from moving a sample.
  const double eps = 0.25 / room().scenario.imu_rate;
  for (std::size_t k = 1; k < scans.size(); ++k) {
    const auto n = std::count_if(imu.begin(), imu.end(), [&](const StampedPose& s) {
      return s.t > scans[k - 1].t + eps && s.t <= scans[k].t + eps;
    });
    EXPECT_GE(static_cast<double>(n), rate_ratio) << k;
  }
}

TEST(Pipeline, LaserOnlyBypassesTheOptimizer) {
  const Pipeline p = run_prefix(room(), kScans, false);
  const RunReport& r = p.report();
  EXPECT_FALSE(r.imu_fusion);
  EXPECT_EQ(r.skips, 0u);
  EXPECT_TRUE(p.imu_rate().empty());
  for (const auto& s : r.scans) EXPECT_FALSE(s.optimized);
  EXPECT_EQ(p.estimate().size(), r.scans.size());
  const RelativeError step = drift(p.estimate(), room().data.ground_truth, 1);
  EXPECT_LT(step.e_trans, 0.02);
  EXPECT_LT(step.e_rot, 0.1 * kDeg);
}

TEST(Pipeline, StreamGapsAreHardErrors) {
  std::vector<ImuSample> imu = room().data.imu;
  // Remove 0.6 s of IMU in the middle.
  const double t_cut = imu.front().t + 3.0;
  std::erase_if(imu, [&](const ImuSample& s) { return s.t > t_cut && s.t < t_cut + 0.6; });
  EXPECT_THROW(Pipeline(room().config, imu), Error);

  Pipeline p(room().config, room().data.imu);
  p.process(room().data.scans[0]);
  for (std::size_t k = 1; k < 12; ++k) p.process(room().data.scans[k]);
  try {
    p.process(room().data.scans[20]);
    FAIL() << "expected a scan gap error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find(fmt::format("{:.3f}", room().data.scans[20].t)), std::string::npos)
        << e.what();
  }
}

TEST(RunPipeline, WritesTrajectoriesAndReport) {
  test::TempDir dir("run");
  const Fixture& f = room();
  SimulationOptions opts;
  opts.preset = "room";
  opts.seed = 3;
  Dataset small = f.data;
  small.scans.resize(30);
  write_dataset(dir.path() / "data", small, f.scenario, opts);
  PipelineConfig cfg = f.config;
  cfg.dataset_dir = dir.path() / "data";
  cfg.output_dir = dir.path() / "out";
  const RunReport r = run_pipeline(cfg);
  EXPECT_EQ(r.skips, 0u);
  for (const char* name : {"fused.txt", "frontend.txt", "imu_rate.txt", "report.txt"}) {
    EXPECT_TRUE(std::filesystem::exists(cfg.output_dir / name)) << name;
  }
  const Trajectory fused = read_trajectory(cfg.output_dir / "fused.txt");
  EXPECT_EQ(fused.size(), r.scans.size());
  const std::string report = test::read_file(cfg.output_dir / "report.txt");
  EXPECT_NE(report.find("skips = 0\n"), std::string::npos);

  cfg.imu_fusion = false;
  const RunReport lo = run_pipeline(cfg);
  EXPECT_FALSE(lo.imu_fusion);
  EXPECT_TRUE(std::filesystem::exists(cfg.output_dir / "laser_only.txt"));
}

}  // namespace
}  // namespace ringlio

#pragma once

#include <cstddef>
#include <deque>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ringlio/config.hpp"
#include "ringlio/evaluation.hpp"
#include "ringlio/imu.hpp"
#include "ringlio/optimizer.hpp"
#include "ringlio/preintegration.hpp"
#include "ringlio/scan_matcher.hpp"

namespace ringlio {

/// kIgnored scans fall outside the usable IMU span and are not part of the report.
enum class ScanStatus { kIgnored, kInitialization, kMatched, kSkipped };
std::string to_string(ScanStatus s);

struct ScanSummary {
  double t = 0.0;
  ScanStatus status = ScanStatus::kMatched;
  std::string cause;  ///< skip reason
  double rms = 0.0;
  int icp_iterations = 0;
  bool optimized = false;
  int optimizer_iterations = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  std::string termination;
  std::string error;  ///< module error recorded for this scan, if any
};

struct StageTimings {
  double propagation = 0.0;  ///< s
  double matching = 0.0;
  double optimization = 0.0;
};

struct RunReport {
  bool imu_fusion = true;
  std::vector<ScanSummary> scans;  ///< processed scans only
  std::size_t matches = 0;
  std::size_t skips = 0;
  /// Scans outside the IMU stream or inside the standstill used for initialization.
  std::size_t ignored_scans = 0;
  std::vector<std::filesystem::path> outputs;
  StageTimings timings;
};

/// key = value summary followed by one line per processed scan.
void write_run_report(const std::filesystem::path& path, const RunReport& report);

/// Scan-by-scan estimator. With fusion, IMU propagation seeds the matcher and a
/// sliding window fuses pre-integrated IMU with LiDAR relative poses. Without
/// fusion, the matcher runs on a constant-velocity guess and its poses are the
/// output.
class Pipeline {
 public:
  /// Throws Error on an IMU gap above config.max_stream_gap (fusion mode).
  Pipeline(PipelineConfig config, std::vector<ImuSample> imu);

  /// Scans must arrive in time order; a larger gap than config.max_stream_gap
  /// between processed scans throws Error.
  ScanSummary process(const RingedScan& scan);

  /// Flushes the window into the estimate.
  void finish();

  /// IMU body poses at scan times: fused states, or the laser-only chain.
  const Trajectory& estimate() const { return estimate_; }
  /// IMU body poses implied by the matcher alone.
  const Trajectory& frontend() const { return frontend_; }
  /// Propagated IMU poses at every IMU sample (fusion mode).
  const Trajectory& imu_rate() const { return imu_rate_; }

  const ScanMatcher& matcher() const { return matcher_; }
  std::vector<ImuState> window_states() const;
  const RunReport& report() const { return report_; }
  const PipelineConfig& config() const { return config_; }

 private:
  struct Entry {
    std::size_t id = 0;
    ImuState state;
    Pim pim;  ///< from the previous entry
    std::optional<std::size_t> lidar_from;
    PoseSE3 lidar_measurement;
  };

  ScanSummary process_fused(const RingedScan& scan);
  ScanSummary process_laser_only(const RingedScan& scan);
  bool initialize_fused(double t);
  void step_to(const ImuSample& next);
  void propagate_to(double t);
  void optimize(ScanSummary& summary);
  void trim_window();

  PipelineConfig config_;
  std::vector<ImuSample> imu_;
  ScanMatcher matcher_;
  RunReport report_;
  Trajectory estimate_;
  Trajectory frontend_;
  Trajectory imu_rate_;

  bool initialized_ = false;
  double last_scan_t_ = 0.0;
  PoseSE3 T_w_L0_;

  // Fusion state.
  ImuState current_;
  ImuSample boundary_;  ///< sample at current_.t
  std::size_t next_sample_ = 0;
  Pim pim_;
  std::deque<Entry> window_;
  std::size_t next_id_ = 0;
  std::optional<std::size_t> last_matched_id_;
  std::optional<ImuState> last_matched_state_;

  // Laser-only state.
  PoseSE3 velocity_guess_;
  std::size_t intervals_since_match_ = 0;
};

/// Loads the dataset, runs every scan, writes the trajectories and report into
/// config.output_dir, and returns the report.
RunReport run_pipeline(const PipelineConfig& config);

}  // namespace ringlio

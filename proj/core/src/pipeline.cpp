#include "ringlio/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "ringlio/dataset.hpp"
#include "ringlio/errors.hpp"

namespace ringlio {

namespace {

constexpr double kTimeEps = 1e-9;

class StageTimer {
 public:
  explicit StageTimer(double& sink) : sink_(sink), start_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    sink_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }
  StageTimer(const StageTimer&) = delete;
  StageTimer& operator=(const StageTimer&) = delete;

 private:
  double& sink_;
  std::chrono::steady_clock::time_point start_;
};

PoseSE3 power(const PoseSE3& step, std::size_t n) {
  PoseSE3 out;
  for (std::size_t k = 0; k < n; ++k) out = out * step;
  return out;
}

}  // namespace

std::string to_string(ScanStatus s) {
  switch (s) {
    case ScanStatus::kIgnored: return "ignored";
    case ScanStatus::kInitialization: return "init";
    case ScanStatus::kMatched: return "matched";
    case ScanStatus::kSkipped: return "skipped";
  }
  return "unknown";
}

Pipeline::Pipeline(PipelineConfig config, std::vector<ImuSample> imu)
    : config_(std::move(config)), imu_(std::move(imu)), matcher_(config_.matcher) {
  report_.imu_fusion = config_.imu_fusion;
  if (!config_.imu_fusion) return;
  if (imu_.size() < 2) throw Error("fusion mode needs an IMU stream with at least two samples");
  for (std::size_t k = 1; k < imu_.size(); ++k) {
    const double gap = imu_[k].t - imu_[k - 1].t;
    if (!(gap > 0.0)) {
      throw Error(fmt::format("IMU timestamps not increasing at t={:.9f}", imu_[k].t));
    }
    if (gap > config_.max_stream_gap) {
      throw Error(fmt::format("IMU stream gap of {:.6f} s between t={:.9f} and t={:.9f}", gap, imu_[k - 1].t,
                              imu_[k].t));
    }
  }
}

ScanSummary Pipeline::process(const RingedScan& scan) {
  if (initialized_) {
    if (!(scan.t > last_scan_t_)) {
      throw Error(fmt::format("scan at t={:.9f} does not follow t={:.9f}", scan.t, last_scan_t_));
    }
    if (scan.t - last_scan_t_ > config_.max_stream_gap) {
      throw Error(fmt::format("LiDAR stream gap of {:.6f} s between t={:.9f} and t={:.9f}", scan.t - last_scan_t_,
                              last_scan_t_, scan.t));
    }
  }
  ScanSummary s = config_.imu_fusion ? process_fused(scan) : process_laser_only(scan);
  if (s.status == ScanStatus::kIgnored) {
    ++report_.ignored_scans;
    return s;
  }
  last_scan_t_ = scan.t;
  if (s.status == ScanStatus::kMatched) ++report_.matches;
  if (s.status == ScanStatus::kSkipped) ++report_.skips;
  report_.scans.push_back(s);
  return s;
}

namespace {

void fill_match(ScanSummary& s, const MatchResult& m) {
  s.rms = m.rms;
  s.icp_iterations = m.iterations;
  if (m.initialization) {
    s.status = ScanStatus::kInitialization;
  } else if (m.mismatch) {
    s.status = ScanStatus::kSkipped;
    s.cause = m.cause;
  } else {
    s.status = ScanStatus::kMatched;
  }
}

}  // namespace

ScanSummary Pipeline::process_laser_only(const RingedScan& scan) {
  ScanSummary s;
  s.t = scan.t;
  const PoseSE3 t_il = config_.extrinsics.T_IL();
  PoseSE3 guess;
  if (initialized_) {
    ++intervals_since_match_;
    guess = power(velocity_guess_, intervals_since_match_);
  }
  MatchResult m;
  {
    StageTimer timer(report_.timings.matching);
    m = matcher_.process(scan, guess);
  }
  fill_match(s, m);
  if (!initialized_) {
    initialized_ = true;
    T_w_L0_ = t_il;
  }
  if (!m.mismatch) {
    if (intervals_since_match_ == 1) velocity_guess_ = m.T_last_curr;
    intervals_since_match_ = 0;
    const PoseSE3 body = T_w_L0_ * m.T_local_curr * t_il.inverse();
    estimate_.push_back({scan.t, body});
    frontend_.push_back({scan.t, body});
  }
  return s;
}

bool Pipeline::initialize_fused(double t) {
  const double t0 = imu_.front().t;
  if (t < t0 + config_.static_init_duration - kTimeEps || t > imu_.back().t + kTimeEps) return false;

  std::vector<ImuSample> still;
  for (const auto& s : imu_) {
    if (s.t > t0 + config_.static_init_duration + kTimeEps) break;
    still.push_back(s);
  }
  ImuState x;
  x.q = align_gravity(still, config_.noise);
  if (config_.static_init_duration > 0.0) {
    Vec3 acc = Vec3::Zero();
    Vec3 gyro = Vec3::Zero();
    for (const auto& s : still) {
      acc += s.acc;
      gyro += s.gyro;
    }
    acc /= static_cast<double>(still.size());
    gyro /= static_cast<double>(still.size());
    // At rest a_m = R^T g + b_a; only the gravity-aligned part separates from tilt.
    x.ba = acc - x.q.inverse().rotate(config_.noise.gravity);
    x.bg = gyro;
  }
  x.t = t;

  // Boundary sample at t.
  next_sample_ = 0;
  while (next_sample_ < imu_.size() && imu_[next_sample_].t <= t + kTimeEps) ++next_sample_;
  if (next_sample_ > 0 && std::abs(imu_[next_sample_ - 1].t - t) <= kTimeEps) {
    boundary_ = imu_[next_sample_ - 1];
  } else {
    boundary_ = interpolate_sample(imu_[next_sample_ - 1], imu_[next_sample_], t);
  }
  boundary_.t = t;
  current_ = x;
  pim_ = Pim::at_bias(x.ba, x.bg);
  return true;
}

void Pipeline::step_to(const ImuSample& next) {
  const double dt = next.t - boundary_.t;
  if (dt <= 0.0) return;
  const auto pieces = static_cast<int>(std::ceil(dt / kMaxImuStep));
  ImuSample prev = boundary_;
  for (int i = 1; i <= pieces; ++i) {
    const ImuSample s = i == pieces ? next : interpolate_sample(boundary_, next, boundary_.t + dt * i / pieces);
    current_ = propagate_state(current_, prev, s, config_.noise);
    pim_ = pim_integrate(pim_, prev, s, config_.noise);
    current_.t = s.t;
    prev = s;
  }
  boundary_ = next;
}

void Pipeline::propagate_to(double t) {
  while (next_sample_ < imu_.size() && imu_[next_sample_].t <= t + kTimeEps) {
    step_to(imu_[next_sample_]);
    ++next_sample_;
    imu_rate_.push_back({current_.t, current_.pose()});
  }
  if (current_.t < t - kTimeEps) {
    if (next_sample_ >= imu_.size()) throw Error(fmt::format("no IMU data beyond t={:.9f}", current_.t));
    step_to(interpolate_sample(boundary_, imu_[next_sample_], t));
  }
  current_.t = t;
  boundary_.t = t;
}

ScanSummary Pipeline::process_fused(const RingedScan& scan) {
  ScanSummary s;
  s.t = scan.t;
  const PoseSE3 t_il = config_.extrinsics.T_IL();

  if (!initialized_) {
    if (!initialize_fused(scan.t)) {
      s.status = ScanStatus::kIgnored;
      return s;
    }
    MatchResult m;
    {
      StageTimer timer(report_.timings.matching);
      m = matcher_.process(scan, PoseSE3{});
    }
    fill_match(s, m);
    initialized_ = true;
    T_w_L0_ = current_.pose() * t_il;
    Entry e;
    e.id = next_id_++;
    e.state = current_;
    window_.push_back(e);
    last_matched_id_ = e.id;
    last_matched_state_ = current_;
    frontend_.push_back({scan.t, T_w_L0_ * m.T_local_curr * t_il.inverse()});
    imu_rate_.push_back({current_.t, current_.pose()});
    return s;
  }

  if (scan.t > imu_.back().t + kTimeEps) {
    s.status = ScanStatus::kIgnored;
    return s;
  }
  {
    StageTimer timer(report_.timings.propagation);
    propagate_to(scan.t);
  }

  Entry e;
  e.id = next_id_++;
  e.state = current_;
  e.pim = pim_;
  const PoseSE3 guess = predicted_lidar_motion(*last_matched_state_, current_, config_.extrinsics);
  MatchResult m;
  {
    StageTimer timer(report_.timings.matching);
    m = matcher_.process(scan, guess);
  }
  fill_match(s, m);
  if (!m.mismatch) {
    e.lidar_from = last_matched_id_;
    e.lidar_measurement = m.T_last_curr;
    frontend_.push_back({scan.t, T_w_L0_ * m.T_local_curr * t_il.inverse()});
  }
  window_.push_back(e);
  if (!m.mismatch) {
    optimize(s);
    last_matched_id_ = window_.back().id;
    last_matched_state_ = window_.back().state;
  }
  current_ = window_.back().state;
  pim_ = Pim::at_bias(current_.ba, current_.bg);
  trim_window();
  return s;
}

void Pipeline::optimize(ScanSummary& summary) {
  StageTimer timer(report_.timings.optimization);
  WindowProblem p;
  p.extrinsics = config_.extrinsics;
  p.gravity = config_.noise.gravity;
  p.weights = config_.weights;
  const std::size_t front = window_.front().id;
  for (std::size_t k = 0; k < window_.size(); ++k) {
    const Entry& e = window_[k];
    p.states.push_back(e.state);
    if (k > 0) p.pims.push_back({k - 1, k, e.pim});
    if (e.lidar_from && *e.lidar_from >= front) p.lidar.push_back({*e.lidar_from - front, k, e.lidar_measurement});
  }
  if (p.lidar.empty() || p.states.size() < 2) return;
  try {
    const WindowSolution sol = optimize_window(p, config_.optimizer);
    for (std::size_t k = 1; k < window_.size(); ++k) {
      ImuState& st = window_[k].state;
      const Mat15 cov = st.P;
      const double t = st.t;
      st = sol.states[k];
      st.P = cov;
      st.t = t;
    }
    summary.optimized = true;
    summary.optimizer_iterations = sol.report.iterations;
    summary.initial_cost = sol.report.initial_cost;
    summary.final_cost = sol.report.final_cost;
    summary.termination = to_string(sol.report.termination);
  } catch (const Error& err) {
    summary.error = err.what();
  }
  for (const auto& e : window_) {
    if (last_matched_id_ && e.id == *last_matched_id_) last_matched_state_ = e.state;
  }
}

void Pipeline::trim_window() {
  while (window_.size() > config_.window_size) {
    estimate_.push_back({window_.front().state.t, window_.front().state.pose()});
    window_.pop_front();
  }
}

void Pipeline::finish() {
  if (!config_.imu_fusion) return;
  for (const auto& e : window_) estimate_.push_back({e.state.t, e.state.pose()});
  window_.clear();
}

std::vector<ImuState> Pipeline::window_states() const {
  std::vector<ImuState> out;
  for (const auto& e : window_) out.push_back(e.state);
  return out;
}

void write_run_report(const std::filesystem::path& path, const RunReport& report) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << fmt::format("mode = {}\n", report.imu_fusion ? "fused" : "laser-only");
  os << fmt::format("scans = {}\n", report.scans.size());
  os << fmt::format("matches = {}\n", report.matches);
  os << fmt::format("skips = {}\n", report.skips);
  os << fmt::format("ignored_scans = {}\n", report.ignored_scans);
  for (const auto& p : report.outputs) os << fmt::format("output = {}\n", p.string());
  os << fmt::format("timing.propagation_s = {:.6f}\n", report.timings.propagation);
  os << fmt::format("timing.matching_s = {:.6f}\n", report.timings.matching);
  os << fmt::format("timing.optimization_s = {:.6f}\n", report.timings.optimization);
  os << "# t status icp_rms icp_iterations optimized opt_iterations opt_initial_cost opt_final_cost termination "
        "cause error\n";
  for (const auto& s : report.scans) {
    os << fmt::format("{:.9f} {} {:.6g} {} {} {} {:.9g} {:.9g} {} \"{}\" \"{}\"\n", s.t, to_string(s.status), s.rms,
                      s.icp_iterations, s.optimized ? 1 : 0, s.optimizer_iterations, s.initial_cost, s.final_cost,
                      s.termination.empty() ? "-" : s.termination, s.cause, s.error);
  }
}

RunReport run_pipeline(const PipelineConfig& config) {
  config.validate();
  const Dataset data = load_dataset(config.dataset_dir, config.rings.num_rings);
  if (data.scans.empty()) throw Error("dataset has no scans: " + config.dataset_dir.string());
  Pipeline pipeline(config, data.imu);
  for (const auto& scan : data.scans) pipeline.process(scan);
  pipeline.finish();

  RunReport report = pipeline.report();
  report.imu_fusion = config.imu_fusion;
  std::filesystem::create_directories(config.output_dir);
  auto emit = [&](const char* name, const Trajectory& t) {
    const auto path = config.output_dir / name;
    write_trajectory(path, t);
    report.outputs.push_back(path);
  };
  if (config.imu_fusion) {
    emit("fused.txt", pipeline.estimate());
    emit("frontend.txt", pipeline.frontend());
    emit("imu_rate.txt", pipeline.imu_rate());
  } else {
    emit("laser_only.txt", pipeline.estimate());
  }
  report.outputs.push_back(config.output_dir / "report.txt");
  write_run_report(config.output_dir / "report.txt", report);
  return report;
}

}  // namespace ringlio

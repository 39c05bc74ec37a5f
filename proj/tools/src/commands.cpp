#include "ringlio_tools/commands.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "ringlio/config.hpp"
#include "ringlio/dataset.hpp"
#include "ringlio/errors.hpp"
#include "ringlio/evaluation.hpp"
#include "ringlio/pipeline.hpp"
#include "ringlio/presets.hpp"

namespace ringlio::cli {

namespace fs = std::filesystem;

namespace {

struct SimulateArgs {
  std::string preset = "corridor";
  std::uint64_t seed = 1;
  std::string out;
  std::string degradation = "none";
  std::vector<std::size_t> corrupt_scans;
};

struct RunArgs {
  std::string config;
  std::string dataset;
  std::string out;
  bool no_imu_fusion = false;
};

struct EvaluateArgs {
  std::string est;
  std::string gt;
  std::string out;
  double max_dt = kDefaultMaxDt;
  bool no_anchor = false;
};

int simulate(const SimulateArgs& a, std::ostream& out) {
  SimulationOptions opts;
  opts.preset = a.preset;
  opts.seed = a.seed;
  opts.degradation = degradation_from_string(a.degradation);
  opts.corrupt_scans = a.corrupt_scans;
  const Scenario scenario = make_preset(a.preset);
  const Dataset data = simulate(scenario, opts);
  write_dataset(a.out, data, scenario, opts);
  out << fmt::format("simulated {}: {} IMU samples, {} scans -> {}\n", a.preset, data.imu.size(), data.scans.size(),
                     a.out);
  return 0;
}

int run(const RunArgs& a, std::ostream& out) {
  PipelineConfig cfg;
  if (!a.config.empty()) cfg = load_config(a.config);
  if (!a.dataset.empty()) {
    cfg.dataset_dir = a.dataset;
    // Pick up the sensor description of a dataset named on the command line.
    const fs::path meta = cfg.dataset_dir / "meta.txt";
    if (fs::exists(meta)) {
      PipelineConfig merged;
      apply_config(merged, KeyValueFile::parse(meta), "sim.");
      if (!a.config.empty()) apply_config(merged, KeyValueFile::parse(a.config));
      merged.dataset_dir = cfg.dataset_dir;
      merged.output_dir = cfg.output_dir;
      cfg = merged;
    }
  }
  if (!a.out.empty()) cfg.output_dir = a.out;
  if (a.no_imu_fusion) cfg.imu_fusion = false;
  const RunReport report = run_pipeline(cfg);
  out << fmt::format("{} run: {} scans, {} matched, {} skipped, {} ignored\n", report.imu_fusion ? "fused" : "laser-only",
                     report.scans.size(), report.matches, report.skips, report.ignored_scans);
  for (const auto& p : report.outputs) out << "wrote " << p.string() << '\n';
  return 0;
}

int evaluate(const EvaluateArgs& a, std::ostream& out) {
  const Trajectory est = read_trajectory(a.est);
  const Trajectory gt = read_trajectory(a.gt);
  const EvaluationReport report = evaluate_trajectories(est, gt, kDefaultGaps, a.max_dt);

  const auto pairs = associate(est, gt, a.max_dt);
  AssociatedPoses poses = gather(est, gt, pairs);
  if (!a.no_anchor) poses = anchor_to_first(poses);
  const auto series = per_axis_error_series(poses);

  const fs::path dir = a.out.empty() ? fs::path(a.est).parent_path() : fs::path(a.out);
  if (!dir.empty()) fs::create_directories(dir);
  const std::string stem = fs::path(a.est).stem().string();
  const fs::path metrics = dir / (stem + ".metrics.csv");
  const fs::path errors = dir / (stem + ".errors.csv");
  write_metrics_csv(metrics, report);
  write_error_series_csv(errors, series);

  constexpr double kRadToDeg = 180.0 / 3.14159265358979323846;
  out << fmt::format("associated poses: {}\n", report.associated);
  for (const auto& g : report.per_gap) {
    out << fmt::format("gap {:>2}: pairs {:>4}  E_trans {:.6f} m  E_rot {:.6f} deg\n", g.gap, g.error.pairs,
                       g.error.e_trans, g.error.e_rot * kRadToDeg);
  }
  out << fmt::format("pooled : pairs {:>4}  E_trans {:.6f} m  E_rot {:.6f} deg\n", report.pooled.pairs,
                     report.pooled.e_trans, report.pooled.e_rot * kRadToDeg);
  const auto m = mean_abs_error(series);
  out << fmt::format("mean |dx| {:.4f} |dy| {:.4f} |dz| {:.4f} m\n", m[0], m[1], m[2]);
  out << "wrote " << metrics.string() << '\n' << "wrote " << errors.string() << '\n';
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"LiDAR-inertial odometry: simulate datasets, run the estimator, evaluate trajectories", "ringlio"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Write a simulated dataset directory");
  sim_cmd->add_option("--preset", sim.preset, "room | corridor | staircase | outdoor-turn")->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  sim_cmd->add_option("--out", sim.out, "Output dataset directory")->required();
  sim_cmd->add_option("--degradation", sim.degradation, "none | vertical-clip | half-block")->capture_default_str();
  sim_cmd->add_option("--corrupt-scan", sim.corrupt_scans, "Replace this scan index with clutter (repeatable)");

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Run the estimator on a dataset");
  run_cmd->add_option("--config", run_args.config, "Config file (key = value)");
  run_cmd->add_option("--dataset", run_args.dataset, "Dataset directory (overrides dataset.path)");
  run_cmd->add_option("--out", run_args.out, "Output directory (overrides output.path)");
  run_cmd->add_flag("--no-imu-fusion", run_args.no_imu_fusion, "Laser-only baseline: no IMU, no optimization");

  EvaluateArgs eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "Relative pose errors and per-axis error series");
  eval_cmd->add_option("--est", eval.est, "Estimated trajectory (t x y z qx qy qz qw)")->required();
  eval_cmd->add_option("--gt", eval.gt, "Ground-truth trajectory")->required();
  eval_cmd->add_option("--out", eval.out, "Directory for the metrics and series CSV files");
  eval_cmd->add_option("--max-dt", eval.max_dt, "Association window in seconds")->capture_default_str();
  eval_cmd->add_flag("--no-anchor", eval.no_anchor, "Do not align the first estimated pose to ground truth");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (sim_cmd->parsed()) return simulate(sim, out);
    if (run_cmd->parsed()) {
      if (run_args.config.empty() && run_args.dataset.empty()) {
        err << "ringlio run: error: need --config or --dataset\n";
        return 2;
      }
      return run(run_args, out);
    }
    if (eval_cmd->parsed()) return evaluate(eval, out);
  } catch (const std::exception& e) {
    err << "ringlio: error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

namespace {

std::vector<std::string> with_command(const char* name, const std::vector<std::string>& args) {
  std::vector<std::string> full{name};
  full.insert(full.end(), args.begin(), args.end());
  return full;
}

}  // namespace

int cmd_simulate(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return run_cli(with_command("simulate", args), out, err);
}

int cmd_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return run_cli(with_command("run", args), out, err);
}

int cmd_evaluate(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return run_cli(with_command("evaluate", args), out, err);
}

}  // namespace ringlio::cli

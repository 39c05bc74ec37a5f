#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>

#include "ringlio/imu.hpp"
#include "ringlio/optimizer.hpp"
#include "ringlio/scan.hpp"
#include "ringlio/scan_matcher.hpp"

namespace ringlio {

struct KeyValueEntry {
  std::string value;
  std::size_t line = 0;
};

/// Flat `key = value` text. '#' starts a comment; blank lines are ignored;
/// a later duplicate key overrides an earlier one.
struct KeyValueFile {
  std::filesystem::path source;
  std::map<std::string, KeyValueEntry> entries;

  static KeyValueFile parse(const std::filesystem::path& path);
  static KeyValueFile parse_string(const std::string& text, const std::filesystem::path& source = "<string>");
};

struct PipelineConfig {
  std::filesystem::path dataset_dir;
  std::filesystem::path output_dir = "out";

  NoiseParams noise;
  /// Leading standstill used to level the IMU and seed its biases (0 disables).
  double static_init_duration = 1.0;
  Extrinsics extrinsics;
  RingModel rings;

  bool imu_fusion = true;
  std::size_t window_size = 5;
  WindowWeights weights;
  OptimizerOptions optimizer;
  MatcherOptions matcher;
  /// Larger gaps in either sensor stream abort the run.
  double max_stream_gap = 0.5;

  /// Throws DomainError naming the first non-positive tolerance or missing path.
  void validate() const;
};

/// Applies the recognized keys of `file` on top of `config`. Keys under
/// `ignored_prefix` (e.g. "sim.") are skipped; any other unknown key or bad
/// value raises ParseError with its line.
void apply_config(PipelineConfig& config, const KeyValueFile& file, const std::string& ignored_prefix = "");

/// Defaults, then the dataset's meta.txt (if `dataset_dir` is known and has one),
/// then the config file itself.
PipelineConfig load_config(const std::filesystem::path& path);

/// Every recognized key with its current value, one per line.
std::string format_config(const PipelineConfig& config);

}  // namespace ringlio

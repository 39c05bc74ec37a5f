#include "ringlio/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include <fmt/format.h>

#include "ringlio/errors.hpp"
#include "ringlio/text_io.hpp"

namespace ringlio {

namespace {

constexpr double kDeg = 3.14159265358979323846 / 180.0;

struct BadValue {
  std::string what;
};

std::vector<double> numbers(const std::string& text) {
  std::istringstream is(text);
  std::vector<double> out;
  std::string tok;
  while (is >> tok) {
    double v = 0.0;
    if (!parse_double(tok, v)) throw BadValue{fmt::format("'{}' is not a number", tok)};
    out.push_back(v);
  }
  return out;
}

double scalar(const std::string& text) {
  const auto v = numbers(text);
  if (v.size() != 1) throw BadValue{"expected one number"};
  return v[0];
}

std::size_t count(const std::string& text) {
  const double v = scalar(text);
  if (v < 0.0 || v != std::floor(v)) throw BadValue{"expected a non-negative integer"};
  return static_cast<std::size_t>(v);
}

bool boolean(const std::string& text) {
  const std::string_view t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw BadValue{"expected true or false"};
}

template <int N>
Eigen::Matrix<double, N, 1> vec(const std::string& text) {
  const auto v = numbers(text);
  if (v.size() == 1) return Eigen::Matrix<double, N, 1>::Constant(v[0]);
  if (v.size() != static_cast<std::size_t>(N)) throw BadValue{fmt::format("expected 1 or {} numbers", N)};
  return Eigen::Map<const Eigen::Matrix<double, N, 1>>(v.data());
}

std::string fmt_vec(const auto& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) out += fmt::format("{}{:.17g}", i ? " " : "", v[i]);
  return out;
}

std::string fmt_num(double v) { return fmt::format("{:.17g}", v); }

struct Key {
  std::string name;
  std::function<void(PipelineConfig&, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      {"dataset.path", [](PipelineConfig& c, const std::string& v) { c.dataset_dir = std::string(trim(v)); },
       [](const PipelineConfig& c) { return c.dataset_dir.string(); }},
      {"output.path", [](PipelineConfig& c, const std::string& v) { c.output_dir = std::string(trim(v)); },
       [](const PipelineConfig& c) { return c.output_dir.string(); }},

      {"imu.sigma_acc", [](PipelineConfig& c, const std::string& v) { c.noise.sigma_acc = vec<3>(v); },
       [](const PipelineConfig& c) { return fmt_vec(c.noise.sigma_acc); }},
      {"imu.sigma_acc_bias", [](PipelineConfig& c, const std::string& v) { c.noise.sigma_acc_bias = vec<3>(v); },
       [](const PipelineConfig& c) { return fmt_vec(c.noise.sigma_acc_bias); }},
      {"imu.sigma_gyro", [](PipelineConfig& c, const std::string& v) { c.noise.sigma_gyro = vec<3>(v); },
       [](const PipelineConfig& c) { return fmt_vec(c.noise.sigma_gyro); }},
      {"imu.sigma_gyro_bias", [](PipelineConfig& c, const std::string& v) { c.noise.sigma_gyro_bias = vec<3>(v); },
       [](const PipelineConfig& c) { return fmt_vec(c.noise.sigma_gyro_bias); }},
      {"imu.gravity", [](PipelineConfig& c, const std::string& v) { c.noise.gravity = vec<3>(v); },
       [](const PipelineConfig& c) { return fmt_vec(c.noise.gravity); }},
      {"imu.full_qd_integral", [](PipelineConfig& c, const std::string& v) { c.noise.full_qd_integral = boolean(v); },
       [](const PipelineConfig& c) { return std::string(c.noise.full_qd_integral ? "true" : "false"); }},
      {"imu.static_init_duration", [](PipelineConfig& c, const std::string& v) { c.static_init_duration = scalar(v); },
       [](const PipelineConfig& c) { return fmt_num(c.static_init_duration); }},

      {"extrinsics.p_il", [](PipelineConfig& c, const std::string& v) { c.extrinsics.p_IL = vec<3>(v); },
       [](const PipelineConfig& c) { return fmt_vec(c.extrinsics.p_IL); }},
      {"extrinsics.q_il_wxyz",
       [](PipelineConfig& c, const std::string& v) {
         const auto q = numbers(v);
         if (q.size() != 4) throw BadValue{"expected 4 numbers (w x y z)"};
         c.extrinsics.q_IL = UnitQuaternion(q[0], q[1], q[2], q[3]);
       },
       [](const PipelineConfig& c) { return fmt_vec(c.extrinsics.q_IL.wxyz()); }},

      {"lidar.num_rings", [](PipelineConfig& c, const std::string& v) { c.rings.num_rings = static_cast<int>(count(v)); },
       [](const PipelineConfig& c) { return std::to_string(c.rings.num_rings); }},
      {"lidar.min_elevation_deg", [](PipelineConfig& c, const std::string& v) { c.rings.min_elevation = scalar(v) * kDeg; },
       [](const PipelineConfig& c) { return fmt_num(c.rings.min_elevation / kDeg); }},
      {"lidar.max_elevation_deg", [](PipelineConfig& c, const std::string& v) { c.rings.max_elevation = scalar(v) * kDeg; },
       [](const PipelineConfig& c) { return fmt_num(c.rings.max_elevation / kDeg); }},

      {"pipeline.imu_fusion", [](PipelineConfig& c, const std::string& v) { c.imu_fusion = boolean(v); },
       [](const PipelineConfig& c) { return std::string(c.imu_fusion ? "true" : "false"); }},
      {"pipeline.max_stream_gap", [](PipelineConfig& c, const std::string& v) { c.max_stream_gap = scalar(v); },
       [](const PipelineConfig& c) { return fmt_num(c.max_stream_gap); }},

      {"window.size", [](PipelineConfig& c, const std::string& v) { c.window_size = count(v); },
       [](const PipelineConfig& c) { return std::to_string(c.window_size); }},
      {"window.pose_sigma", [](PipelineConfig& c, const std::string& v) { c.weights.pose_sigma = vec<6>(v); },
       [](const PipelineConfig& c) { return fmt_vec(c.weights.pose_sigma); }},
      {"window.sigma_acc_bias", [](PipelineConfig& c, const std::string& v) { c.weights.sigma_acc_bias = vec<3>(v); },
       [](const PipelineConfig& c) { return fmt_vec(c.weights.sigma_acc_bias); }},
      {"window.sigma_gyro_bias", [](PipelineConfig& c, const std::string& v) { c.weights.sigma_gyro_bias = vec<3>(v); },
       [](const PipelineConfig& c) { return fmt_vec(c.weights.sigma_gyro_bias); }},
      {"window.covariance_floor", [](PipelineConfig& c, const std::string& v) { c.weights.covariance_floor = scalar(v); },
       [](const PipelineConfig& c) { return fmt_num(c.weights.covariance_floor); }},

      {"optimizer.max_iterations",
       [](PipelineConfig& c, const std::string& v) { c.optimizer.max_iterations = static_cast<int>(count(v)); },
       [](const PipelineConfig& c) { return std::to_string(c.optimizer.max_iterations); }},
      {"optimizer.relative_cost_tolerance",
       [](PipelineConfig& c, const std::string& v) { c.optimizer.relative_cost_tolerance = scalar(v); },
       [](const PipelineConfig& c) { return fmt_num(c.optimizer.relative_cost_tolerance); }},
      {"optimizer.gradient_tolerance",
       [](PipelineConfig& c, const std::string& v) { c.optimizer.gradient_tolerance = scalar(v); },
       [](const PipelineConfig& c) { return fmt_num(c.optimizer.gradient_tolerance); }},
      {"optimizer.step_tolerance",
       [](PipelineConfig& c, const std::string& v) { c.optimizer.step_tolerance = scalar(v); },
       [](const PipelineConfig& c) { return fmt_num(c.optimizer.step_tolerance); }},
      {"optimizer.initial_lambda", [](PipelineConfig& c, const std::string& v) { c.optimizer.initial_lambda = scalar(v); },
       [](const PipelineConfig& c) { return fmt_num(c.optimizer.initial_lambda); }},

      {"matcher.mismatch_translation",
       [](PipelineConfig& c, const std::string& v) { c.matcher.mismatch_translation = scalar(v); },
       [](const PipelineConfig& c) { return fmt_num(c.matcher.mismatch_translation); }},
      {"matcher.mismatch_rotation_deg",
       [](PipelineConfig& c, const std::string& v) { c.matcher.mismatch_rotation = scalar(v) * kDeg; },
       [](const PipelineConfig& c) { return fmt_num(c.matcher.mismatch_rotation / kDeg); }},
      {"matcher.source_voxel", [](PipelineConfig& c, const std::string& v) { c.matcher.source_voxel = scalar(v); },
       [](const PipelineConfig& c) { return fmt_num(c.matcher.source_voxel); }},
      {"matcher.min_inlier_ratio", [](PipelineConfig& c, const std::string& v) { c.matcher.min_inlier_ratio = scalar(v); },
       [](const PipelineConfig& c) { return fmt_num(c.matcher.min_inlier_ratio); }},

      {"icp.max_iterations",
       [](PipelineConfig& c, const std::string& v) { c.matcher.icp.max_iterations = static_cast<int>(count(v)); },
       [](const PipelineConfig& c) { return std::to_string(c.matcher.icp.max_iterations); }},
      {"icp.convergence_tolerance",
       [](PipelineConfig& c, const std::string& v) { c.matcher.icp.convergence_tolerance = scalar(v); },
       [](const PipelineConfig& c) { return fmt_num(c.matcher.icp.convergence_tolerance); }},
      {"icp.max_correspondence_distance",
       [](PipelineConfig& c, const std::string& v) { c.matcher.icp.max_correspondence_distance = scalar(v); },
       [](const PipelineConfig& c) { return fmt_num(c.matcher.icp.max_correspondence_distance); }},
      {"icp.max_normal_angle_deg",
       [](PipelineConfig& c, const std::string& v) { c.matcher.icp.max_normal_angle = scalar(v) * kDeg; },
       [](const PipelineConfig& c) { return fmt_num(c.matcher.icp.max_normal_angle / kDeg); }},
      {"icp.trim_fraction", [](PipelineConfig& c, const std::string& v) { c.matcher.icp.trim_fraction = scalar(v); },
       [](const PipelineConfig& c) { return fmt_num(c.matcher.icp.trim_fraction); }},
      {"icp.min_correspondences",
       [](PipelineConfig& c, const std::string& v) { c.matcher.icp.min_correspondences = count(v); },
       [](const PipelineConfig& c) { return std::to_string(c.matcher.icp.min_correspondences); }},
      {"icp.degeneracy_ratio", [](PipelineConfig& c, const std::string& v) { c.matcher.icp.degeneracy_ratio = scalar(v); },
       [](const PipelineConfig& c) { return fmt_num(c.matcher.icp.degeneracy_ratio); }},

      {"normals.k", [](PipelineConfig& c, const std::string& v) { c.matcher.normals.k = count(v); },
       [](const PipelineConfig& c) { return std::to_string(c.matcher.normals.k); }},
      {"normals.min_neighbors", [](PipelineConfig& c, const std::string& v) { c.matcher.normals.min_neighbors = count(v); },
       [](const PipelineConfig& c) { return std::to_string(c.matcher.normals.min_neighbors); }},
      {"normals.max_neighbor_distance",
       [](PipelineConfig& c, const std::string& v) { c.matcher.normals.max_neighbor_distance_abs = scalar(v); },
       [](const PipelineConfig& c) { return fmt_num(c.matcher.normals.max_neighbor_distance_abs); }},
      {"normals.relative_neighbor_distance",
       [](PipelineConfig& c, const std::string& v) { c.matcher.normals.max_neighbor_distance_rel = scalar(v); },
       [](const PipelineConfig& c) { return fmt_num(c.matcher.normals.max_neighbor_distance_rel); }},
      {"normals.min_off_ring_neighbors",
       [](PipelineConfig& c, const std::string& v) { c.matcher.normals.min_off_ring_neighbors = count(v); },
       [](const PipelineConfig& c) { return std::to_string(c.matcher.normals.min_off_ring_neighbors); }},
      {"normals.min_planarity", [](PipelineConfig& c, const std::string& v) { c.matcher.normals.min_planarity = scalar(v); },
       [](const PipelineConfig& c) { return fmt_num(c.matcher.normals.min_planarity); }},

      {"normals.max_plane_rms", [](PipelineConfig& c, const std::string& v) { c.matcher.normals.max_plane_rms = scalar(v); },
       [](const PipelineConfig& c) { return fmt_num(c.matcher.normals.max_plane_rms); }},

      {"map.voxel_size", [](PipelineConfig& c, const std::string& v) { c.matcher.map.voxel_size = scalar(v); },
       [](const PipelineConfig& c) { return fmt_num(c.matcher.map.voxel_size); }},
      {"map.crop_radius", [](PipelineConfig& c, const std::string& v) { c.matcher.map.crop_radius = scalar(v); },
       [](const PipelineConfig& c) { return fmt_num(c.matcher.map.crop_radius); }},
  };
  return table;
}

const Key* find_key(const std::string& name) {
  for (const auto& k : keys()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

}  // namespace

KeyValueFile KeyValueFile::parse_string(const std::string& text, const std::filesystem::path& source) {
  KeyValueFile f;
  f.source = source;
  std::istringstream is(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::string_view body = line;
    if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    body = trim(body);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw ParseError(source.string(), line_no, "expected 'key = value'");
    const std::string key(trim(body.substr(0, eq)));
    const std::string value(trim(body.substr(eq + 1)));
    if (key.empty()) throw ParseError(source.string(), line_no, "empty key");
    f.entries[key] = KeyValueEntry{value, line_no};
  }
  return f;
}

KeyValueFile KeyValueFile::parse(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_string(ss.str(), path);
}

void apply_config(PipelineConfig& config, const KeyValueFile& file, const std::string& ignored_prefix) {
  for (const auto& [name, entry] : file.entries) {
    if (!ignored_prefix.empty() && name.rfind(ignored_prefix, 0) == 0) continue;
    const Key* key = find_key(name);
    if (!key) throw ParseError(file.source.string(), entry.line, fmt::format("unknown key '{}'", name));
    try {
      key->set(config, entry.value);
    } catch (const BadValue& e) {
      throw ParseError(file.source.string(), entry.line, fmt::format("{}: {}", name, e.what));
    }
  }
}

PipelineConfig load_config(const std::filesystem::path& path) {
  const KeyValueFile file = KeyValueFile::parse(path);
  PipelineConfig probe;
  apply_config(probe, file);

  PipelineConfig config;
  const auto base = path.parent_path();
  auto resolve = [&](const std::filesystem::path& p) { return p.empty() || p.is_absolute() ? p : base / p; };
  if (!probe.dataset_dir.empty()) {
    const auto meta = resolve(probe.dataset_dir) / "meta.txt";
    if (std::filesystem::exists(meta)) apply_config(config, KeyValueFile::parse(meta), "sim.");
  }
  apply_config(config, file);
  config.dataset_dir = resolve(config.dataset_dir);
  if (file.entries.count("output.path")) config.output_dir = resolve(config.output_dir);
  return config;
}

std::string format_config(const PipelineConfig& config) {
  std::string out;
  for (const auto& k : keys()) out += fmt::format("{} = {}\n", k.name, k.get(config));
  return out;
}

void PipelineConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw DomainError(fmt::format("config: {} must be positive (got {})", name, v));
  };
  auto non_negative = [](double v, const char* name) {
    if (!(v >= 0.0)) throw DomainError(fmt::format("config: {} must be non-negative (got {})", name, v));
  };
  if (dataset_dir.empty()) throw DomainError("config: dataset.path is not set");
  if (!std::filesystem::is_directory(dataset_dir)) {
    throw DomainError(fmt::format("config: dataset directory {} does not exist", dataset_dir.string()));
  }
  for (const char* f : {"imu.csv", "scans"}) {
    if (!std::filesystem::exists(dataset_dir / f)) {
      throw DomainError(fmt::format("config: {} is missing from the dataset", (dataset_dir / f).string()));
    }
  }
  for (int i = 0; i < 3; ++i) {
    non_negative(noise.sigma_acc[i], "imu.sigma_acc");
    non_negative(noise.sigma_acc_bias[i], "imu.sigma_acc_bias");
    non_negative(noise.sigma_gyro[i], "imu.sigma_gyro");
    non_negative(noise.sigma_gyro_bias[i], "imu.sigma_gyro_bias");
    positive(weights.sigma_acc_bias[i], "window.sigma_acc_bias");
    positive(weights.sigma_gyro_bias[i], "window.sigma_gyro_bias");
  }
  for (int i = 0; i < 6; ++i) positive(weights.pose_sigma[i], "window.pose_sigma");
  non_negative(static_init_duration, "imu.static_init_duration");
  positive(weights.covariance_floor, "window.covariance_floor");
  if (window_size < 2) throw DomainError("config: window.size must be at least 2");
  if (rings.num_rings < 2) throw DomainError("config: lidar.num_rings must be at least 2");
  positive(max_stream_gap, "pipeline.max_stream_gap");
  positive(optimizer.relative_cost_tolerance, "optimizer.relative_cost_tolerance");
  positive(optimizer.gradient_tolerance, "optimizer.gradient_tolerance");
  non_negative(optimizer.step_tolerance, "optimizer.step_tolerance");
  positive(optimizer.initial_lambda, "optimizer.initial_lambda");
  positive(matcher.mismatch_translation, "matcher.mismatch_translation");
  positive(matcher.mismatch_rotation, "matcher.mismatch_rotation_deg");
  non_negative(matcher.source_voxel, "matcher.source_voxel");
  non_negative(matcher.min_inlier_ratio, "matcher.min_inlier_ratio");
  positive(matcher.icp.convergence_tolerance, "icp.convergence_tolerance");
  positive(matcher.icp.max_correspondence_distance, "icp.max_correspondence_distance");
  positive(matcher.icp.max_normal_angle, "icp.max_normal_angle_deg");
  positive(matcher.icp.trim_fraction, "icp.trim_fraction");
  positive(matcher.icp.degeneracy_ratio, "icp.degeneracy_ratio");
  positive(matcher.normals.max_neighbor_distance_abs, "normals.max_neighbor_distance");
  non_negative(matcher.normals.max_neighbor_distance_rel, "normals.relative_neighbor_distance");
  positive(matcher.normals.max_plane_rms, "normals.max_plane_rms");
  positive(matcher.map.voxel_size, "map.voxel_size");
  positive(matcher.map.crop_radius, "map.crop_radius");
}

}  // namespace ringlio

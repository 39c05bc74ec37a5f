#include <fstream>

#include <gtest/gtest.h>

#include "ringlio/config.hpp"
#include "ringlio/errors.hpp"
#include "test_support.hpp"

namespace ringlio {
namespace {

constexpr double kDeg = 3.14159265358979323846 / 180.0;

void write(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path);
  os << text;
}

std::size_t parse_error_line(const std::string& text) {
  try {
    PipelineConfig c;
    apply_config(c, KeyValueFile::parse_string(text));
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

TEST(KeyValueFile, CommentsBlanksAndOverrides) {
  const auto f = KeyValueFile::parse_string("# header\n\n  a = 1  # trailing\nb=two words\na = 3\n");
  ASSERT_EQ(f.entries.size(), 2u);
  EXPECT_EQ(f.entries.at("a").value, "3");
  EXPECT_EQ(f.entries.at("a").line, 5u);
  EXPECT_EQ(f.entries.at("b").value, "two words");
  EXPECT_EQ(f.entries.at("b").line, 4u);
}

TEST(KeyValueFile, MalformedLinesReportTheirLine) {
  try {
    KeyValueFile::parse_string("a = 1\n\nno equals sign\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(KeyValueFile::parse_string(" = 4\n"), ParseError);
  EXPECT_THROW(KeyValueFile::parse("/nonexistent/config.txt"), Error);
}

TEST(ApplyConfig, SetsTypedValues) {
  PipelineConfig c;
  apply_config(c, KeyValueFile::parse_string("window.size = 7\n"
                                             "pipeline.imu_fusion = off\n"
                                             "imu.sigma_acc = 0.1 0.2 0.3\n"
                                             "imu.sigma_gyro = 0.5\n"
                                             "lidar.min_elevation_deg = -15\n"
                                             "normals.min_off_ring_neighbors = 3\n"
                                             "normals.max_plane_rms = 0.02\n"
                                             "optimizer.step_tolerance = 1e-8\n"));
  EXPECT_EQ(c.window_size, 7u);
  EXPECT_FALSE(c.imu_fusion);
  EXPECT_EQ(c.noise.sigma_acc, Vec3(0.1, 0.2, 0.3));
  EXPECT_EQ(c.noise.sigma_gyro, Vec3::Constant(0.5));
  EXPECT_NEAR(c.rings.min_elevation, -15 * kDeg, 1e-15);
  EXPECT_EQ(c.matcher.normals.min_off_ring_neighbors, 3u);
  EXPECT_EQ(c.matcher.normals.max_plane_rms, 0.02);
  EXPECT_EQ(c.optimizer.step_tolerance, 1e-8);
}

TEST(ApplyConfig, BadValuesAndUnknownKeysReportTheirLine) {
  EXPECT_EQ(parse_error_line("window.size = 3\nwindow.siz = 4\n"), 2u);
  EXPECT_EQ(parse_error_line("\n\nwindow.size = 2.5\n"), 3u);
  EXPECT_EQ(parse_error_line("window.size = -1\n"), 1u);
  EXPECT_EQ(parse_error_line("# c\nimu.sigma_acc = 1 2\n"), 2u);
  EXPECT_EQ(parse_error_line("pipeline.imu_fusion = maybe\n"), 1u);
  EXPECT_EQ(parse_error_line("icp.trim_fraction = abc\n"), 1u);
}

TEST(ApplyConfig, IgnoredPrefixIsSkipped) {
  PipelineConfig c;
  const auto f = KeyValueFile::parse_string("sim.preset = room\nwindow.size = 4\n");
  EXPECT_THROW(apply_config(c, f), ParseError);
  apply_config(c, f, "sim.");
  EXPECT_EQ(c.window_size, 4u);
}

TEST(FormatConfig, RoundTripsEveryKey) {
  PipelineConfig c;
  apply_config(c, KeyValueFile::parse_string("window.size = 9\nimu.sigma_acc = 0.1 0.2 0.3\n"
                                             "extrinsics.q_il_wxyz = 0.5 0.5 0.5 0.5\n"
                                             "matcher.mismatch_rotation_deg = 7.5\n"));
  const std::string text = format_config(c);
  PipelineConfig back;
  apply_config(back, KeyValueFile::parse_string(text));
  EXPECT_EQ(format_config(back), text);
  EXPECT_NE(text.find("window.size = 9\n"), std::string::npos);
}

TEST(LoadConfig, DatasetMetaThenConfigFile) {
  test::TempDir dir("config");
  std::filesystem::create_directories(dir.path() / "data" / "scans");
  write(dir.path() / "data" / "imu.csv", "");
  write(dir.path() / "data" / "meta.txt",
        "sim.preset = room\nimu.sigma_gyro = 0.003\nimu.sigma_acc = 0.04\nwindow.size = 6\n");
  write(dir.path() / "run.cfg", "dataset.path = data\noutput.path = out\nwindow.size = 8\n");
  const PipelineConfig c = load_config(dir.path() / "run.cfg");
  EXPECT_EQ(c.dataset_dir, dir.path() / "data");
  EXPECT_EQ(c.output_dir, dir.path() / "out");
  EXPECT_EQ(c.noise.sigma_gyro, Vec3::Constant(0.003));
  EXPECT_EQ(c.noise.sigma_acc, Vec3::Constant(0.04));
  EXPECT_EQ(c.window_size, 8u);
  EXPECT_NO_THROW(c.validate());
}

TEST(Validate, NamesTheOffendingKey) {
  test::TempDir dir("validate");
  std::filesystem::create_directories(dir.path() / "scans");
  write(dir.path() / "imu.csv", "");
  PipelineConfig c;
  EXPECT_THROW(c.validate(), DomainError);
  c.dataset_dir = dir.path() / "missing";
  EXPECT_THROW(c.validate(), DomainError);
  c.dataset_dir = dir.path();
  EXPECT_NO_THROW(c.validate());

  auto message = [](const PipelineConfig& cfg) -> std::string {
    try {
      cfg.validate();
    } catch (const DomainError& e) {
      return e.what();
    }
    return "";
  };
  PipelineConfig bad = c;
  bad.optimizer.step_tolerance = -1.0;
  EXPECT_NE(message(bad).find("optimizer.step_tolerance"), std::string::npos);
  bad = c;
  bad.matcher.normals.max_plane_rms = 0.0;
  EXPECT_NE(message(bad).find("normals.max_plane_rms"), std::string::npos);
  bad = c;
  bad.weights.pose_sigma[4] = 0.0;
  EXPECT_NE(message(bad).find("window.pose_sigma"), std::string::npos);
  bad = c;
  bad.noise.sigma_acc[1] = -0.1;
  EXPECT_NE(message(bad).find("imu.sigma_acc"), std::string::npos);

  std::filesystem::remove(dir.path() / "imu.csv");
  EXPECT_NE(message(c).find("imu.csv"), std::string::npos);
}

}  // namespace
}  // namespace ringlio

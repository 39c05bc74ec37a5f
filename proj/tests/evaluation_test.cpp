#include <cmath>
#include <fstream>
#include <limits>

#include <Eigen/Geometry>
#include <gtest/gtest.h>

#include "ringlio/errors.hpp"
#include "ringlio/evaluation.hpp"
#include "test_support.hpp"

namespace ringlio {
namespace {

Trajectory random_trajectory(test::Rng& rng, std::size_t n, double dt = 0.1) {
  Trajectory out;
  PoseSE3 pose = test::random_pose(rng, 1.0, 3.0);
  for (std::size_t k = 0; k < n; ++k) {
    out.push_back({dt * static_cast<double>(k), pose});
    pose = pose * test::random_pose(rng, 0.2, 0.1);
  }
  return out;
}

Trajectory perturbed(test::Rng& rng, const Trajectory& traj, double sigma_t, double max_angle) {
  Trajectory out = traj;
  for (auto& s : out) s.pose = s.pose * test::random_pose(rng, sigma_t, max_angle);
  return out;
}

Eigen::Matrix4d homogeneous(const PoseSE3& p) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  const auto& q = p.rotation;
  m.topLeftCorner<3, 3>() = Eigen::Quaterniond(q.w(), q.x(), q.y(), q.z()).toRotationMatrix();
  m.topRightCorner<3, 1>() = p.translation;
  return m;
}

/// Relative error from 4x4 matrices and the trace formula for the angle.
RelativeError matrix_oracle(std::span<const PoseSE3> est, std::span<const PoseSE3> gt, std::span<const FramePair> pairs) {
  RelativeError e;
  for (const auto& fp : pairs) {
    const Eigen::Matrix4d rel_gt = homogeneous(gt[fp.i]).inverse() * homogeneous(gt[fp.j]);
    const Eigen::Matrix4d rel_est = homogeneous(est[fp.i]).inverse() * homogeneous(est[fp.j]);
    const Eigen::Matrix4d d = rel_gt.inverse() * rel_est;
    e.e_trans += d.topRightCorner<3, 1>().norm();
    e.e_rot += std::acos(std::clamp((d.topLeftCorner<3, 3>().trace() - 1.0) / 2.0, -1.0, 1.0));
  }
  e.pairs = pairs.size();
  e.e_trans /= static_cast<double>(pairs.size());
  e.e_rot /= static_cast<double>(pairs.size());
  return e;
}

std::vector<PoseSE3> poses_of(const Trajectory& t) {
  std::vector<PoseSE3> out;
  for (const auto& s : t) out.push_back(s.pose);
  return out;
}

TEST(Associate, IdenticalTimestampsPairOneToOne) {
  test::Rng rng(1);
  const Trajectory gt = random_trajectory(rng, 50);
  const auto pairs = associate(gt, gt);
  ASSERT_EQ(pairs.size(), gt.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    EXPECT_EQ(pairs[k].est, k);
    EXPECT_EQ(pairs[k].gt, k);
  }
}

TEST(Associate, OffsetBeyondWindowMatchesNothing) {
  test::Rng rng(2);
  const Trajectory gt = random_trajectory(rng, 20);
  Trajectory est = gt;
  for (auto& s : est) s.t += kDefaultMaxDt + 1e-6;
  EXPECT_THROW(associate(est, gt), EmptyAssociationError);
  for (auto& s : est) s.t -= 2e-6;
  EXPECT_EQ(associate(est, gt).size(), gt.size());
}

TEST(Associate, JitteredTimestampsMatchBruteForceNearest) {
  test::Rng rng(3);
  std::uniform_real_distribution<double> jitter(-0.03, 0.03);
  std::bernoulli_distribution drop(0.2);
  for (int trial = 0; trial < 20; ++trial) {
    const Trajectory gt = random_trajectory(rng, 100);
    Trajectory est;
    for (const auto& s : gt) {
      if (drop(rng)) continue;
      est.push_back({s.t + jitter(rng), s.pose});
    }
    const auto pairs = associate(est, gt);
    // With 0.1 s spacing and at most 0.03 s jitter, each estimate's nearest gt
    // sample is its source and no two estimates compete for it.
    std::vector<IndexPair> expected;
    for (std::size_t i = 0; i < est.size(); ++i) {
      std::size_t best = 0;
      double best_dt = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < gt.size(); ++j) {
        const double dt = std::abs(gt[j].t - est[i].t);
        if (dt < best_dt) {
          best_dt = dt;
          best = j;
        }
      }
      if (best_dt <= kDefaultMaxDt) expected.push_back({i, best});
    }
    ASSERT_EQ(pairs.size(), expected.size()) << trial;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      EXPECT_EQ(pairs[k].est, expected[k].est);
      EXPECT_EQ(pairs[k].gt, expected[k].gt);
    }
  }
}

TEST(Associate, EachSampleUsedOnce) {
  Trajectory gt;
  Trajectory est;
  for (int k = 0; k < 10; ++k) gt.push_back({0.1 * k, PoseSE3::identity()});
  // Two estimates near the same gt sample: the closer one wins, the other is dropped.
  est.push_back({0.201, PoseSE3::identity()});
  est.push_back({0.205, PoseSE3::identity()});
  const auto pairs = associate(est, gt);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].est, 0u);
  EXPECT_EQ(pairs[0].gt, 2u);
  EXPECT_THROW(associate({}, gt), DomainError);
}

TEST(RelativeErrors, ZeroWhenEqual) {
  test::Rng rng(4);
  const auto gt = poses_of(random_trajectory(rng, 30));
  const auto e = relative_errors(gt, gt, frame_pairs(gt.size(), 1));
  EXPECT_LT(e.e_trans, 1e-12);
  EXPECT_LT(e.e_rot, 1e-12);
  EXPECT_EQ(e.pairs, 29u);
}

TEST(RelativeErrors, HandComputedTwoFrameCase) {
  const std::vector<PoseSE3> gt{PoseSE3::identity(), PoseSE3{UnitQuaternion(), Vec3(1, 0, 0)}};
  const std::vector<PoseSE3> est{PoseSE3::identity(), PoseSE3{UnitQuaternion(), Vec3(1, 0.1, 0)}};
  const std::vector<FramePair> fp{{0, 1}};
  const auto e = relative_errors(est, gt, fp);
  EXPECT_NEAR(e.e_trans, 0.1, 1e-15);
  EXPECT_EQ(e.e_rot, 0.0);
}

TEST(RelativeErrors, MatchesMatrixOracle) {
  test::Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Trajectory gt = random_trajectory(rng, 40);
    const auto g = poses_of(gt);
    const auto e = poses_of(perturbed(rng, gt, 0.05, 0.05));
    for (const std::size_t gap : kDefaultGaps) {
      const auto fp = frame_pairs(g.size(), gap);
      const RelativeError got = relative_errors(e, g, fp);
      const RelativeError want = matrix_oracle(e, g, fp);
      EXPECT_NEAR(got.e_trans, want.e_trans, 1e-10);
      EXPECT_NEAR(got.e_rot, want.e_rot, 1e-7);
      EXPECT_EQ(got.pairs, fp.size());
    }
  }
}

TEST(RelativeErrors, InvariantUnderRigidTransforms) {
  test::Rng rng(6);
  const Trajectory gt = random_trajectory(rng, 40);
  const auto g = poses_of(gt);
  const auto e = poses_of(perturbed(rng, gt, 0.05, 0.05));
  const auto fp = frame_pairs(g.size(), 5);
  const RelativeError base = relative_errors(e, g, fp);
  ASSERT_GT(base.e_trans, 0.0);

  const PoseSE3 t0 = test::random_pose(rng, 10.0, 3.0);
  const PoseSE3 t1 = test::random_pose(rng, 10.0, 3.0);
  std::vector<PoseSE3> e_left;
  std::vector<PoseSE3> g_left;
  std::vector<PoseSE3> e_moved;
  for (std::size_t k = 0; k < g.size(); ++k) {
    e_left.push_back(t0 * e[k]);
    g_left.push_back(t0 * g[k]);
    e_moved.push_back(t1 * e[k]);
  }
  // Same transform on both.
  const RelativeError both = relative_errors(e_left, g_left, fp);
  EXPECT_NEAR(both.e_trans, base.e_trans, 1e-9);
  EXPECT_NEAR(both.e_rot, base.e_rot, 1e-7);
  // A rigid offset of the estimate alone.
  const RelativeError est_only = relative_errors(e_moved, g, fp);
  EXPECT_NEAR(est_only.e_trans, base.e_trans, 1e-9);
  EXPECT_NEAR(est_only.e_rot, base.e_rot, 1e-7);
  const RelativeError zero = relative_errors(e_moved, e, fp);
  EXPECT_NEAR(zero.e_trans, 0.0, 1e-9);
  EXPECT_NEAR(zero.e_rot, 0.0, 1e-7);
}

TEST(RelativeErrors, SymmetricInEstimateAndTruth) {
  test::Rng rng(7);
  const Trajectory gt = random_trajectory(rng, 40);
  const auto g = poses_of(gt);
  const auto e = poses_of(perturbed(rng, gt, 0.05, 0.05));
  for (const std::size_t gap : kDefaultGaps) {
    const auto fp = frame_pairs(g.size(), gap);
    const RelativeError a = relative_errors(e, g, fp);
    const RelativeError b = relative_errors(g, e, fp);
    EXPECT_GE(a.e_trans, 0.0);
    EXPECT_GE(a.e_rot, 0.0);
    // Delta and its inverse share the angle; the inverse's translation is rotated, same norm.
    EXPECT_NEAR(a.e_trans, b.e_trans, 1e-12);
    EXPECT_NEAR(a.e_rot, b.e_rot, 1e-12);
  }
}

TEST(RelativeErrors, RejectsBadPairs) {
  const std::vector<PoseSE3> g(3, PoseSE3::identity());
  EXPECT_THROW(relative_errors(g, g, std::vector<FramePair>{}), DomainError);
  EXPECT_THROW(relative_errors(g, g, std::vector<FramePair>{{0, 3}}), DomainError);
}

TEST(FramePairs, EnumeratesFixedGaps) {
  const auto fp = frame_pairs(12, 5);
  ASSERT_EQ(fp.size(), 7u);
  EXPECT_EQ(fp.front().i, 0u);
  EXPECT_EQ(fp.front().j, 5u);
  EXPECT_EQ(fp.back().i, 6u);
  EXPECT_EQ(fp.back().j, 11u);
  EXPECT_TRUE(frame_pairs(5, 5).empty());
  EXPECT_TRUE(frame_pairs(5, 0).empty());
}

TEST(Evaluate, PooledIsPairWeightedMeanOfGaps) {
  test::Rng rng(8);
  const Trajectory gt = random_trajectory(rng, 60);
  const Trajectory est = perturbed(rng, gt, 0.03, 0.02);
  const EvaluationReport r = evaluate_trajectories(est, gt);
  EXPECT_EQ(r.associated, 60u);
  ASSERT_EQ(r.per_gap.size(), 3u);
  double trans = 0.0;
  double rot = 0.0;
  std::size_t n = 0;
  for (const auto& g : r.per_gap) {
    EXPECT_EQ(g.error.pairs, 60u - g.gap);
    trans += g.error.e_trans * static_cast<double>(g.error.pairs);
    rot += g.error.e_rot * static_cast<double>(g.error.pairs);
    n += g.error.pairs;
  }
  EXPECT_EQ(r.pooled.pairs, n);
  EXPECT_NEAR(r.pooled.e_trans, trans / static_cast<double>(n), 1e-12);
  EXPECT_NEAR(r.pooled.e_rot, rot / static_cast<double>(n), 1e-12);
}

TEST(Evaluate, MetricsCsvLayout) {
  test::Rng rng(9);
  const Trajectory gt = random_trajectory(rng, 20);
  const EvaluationReport r = evaluate_trajectories(perturbed(rng, gt, 0.03, 0.02), gt);
  test::TempDir dir("eval");
  write_metrics_csv(dir.path() / "m.csv", r);
  std::ifstream is(dir.path() / "m.csv");
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(is, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[0], "gap,pairs,e_trans_m,e_rot_rad,e_rot_deg");
  EXPECT_EQ(lines[1].rfind("1,19,", 0), 0u);
  EXPECT_EQ(lines[2].rfind("5,15,", 0), 0u);
  EXPECT_EQ(lines[3].rfind("10,10,", 0), 0u);
  EXPECT_EQ(lines[4].rfind("pooled,44,", 0), 0u);
}

TEST(Evaluate, TooFewPosesForAnyPair) {
  Trajectory gt{{0.0, PoseSE3::identity()}};
  EXPECT_THROW(evaluate_trajectories(gt, gt), DomainError);
}

TEST(PerAxisError, ZeroWhenEqual) {
  test::Rng rng(10);
  const Trajectory gt = random_trajectory(rng, 20);
  const auto series = per_axis_error_series(gather(gt, gt, associate(gt, gt)));
  ASSERT_EQ(series.size(), 20u);
  for (const auto& e : series) {
    EXPECT_EQ(e.translation, Vec3::Zero());
    EXPECT_LT(e.rpy.norm(), 1e-12);
  }
}

TEST(PerAxisError, ConstantVerticalOffset) {
  test::Rng rng(11);
  const Trajectory gt = random_trajectory(rng, 20);
  Trajectory est = gt;
  for (auto& s : est) s.pose.translation.z() += 0.3;
  const auto series = per_axis_error_series(gather(est, gt, associate(est, gt)));
  for (const auto& e : series) {
    EXPECT_NEAR(e.translation.z(), 0.3, 1e-12);
    EXPECT_NEAR(e.translation.x(), 0.0, 1e-12);
    EXPECT_NEAR(e.translation.y(), 0.0, 1e-12);
    EXPECT_LT(e.rpy.norm(), 1e-12);
  }
  const auto m = mean_abs_error(series);
  EXPECT_NEAR(m[2], 0.3, 1e-12);
  EXPECT_NEAR(m.norm(), 0.3, 1e-12);
}

TEST(PerAxisError, YawOffsetShowsInYaw) {
  Trajectory gt{{0.0, PoseSE3::identity()}};
  Trajectory est{{0.0, PoseSE3{quat_from_rpy(0, 0, 0.2), Vec3::Zero()}}};
  const auto series = per_axis_error_series(gather(est, gt, associate(est, gt)));
  ASSERT_EQ(series.size(), 1u);
  EXPECT_NEAR(series[0].rpy.z(), 0.2, 1e-12);
  EXPECT_NEAR(series[0].rpy.head<2>().norm(), 0.0, 1e-12);
}

TEST(AnchorToFirst, RemovesAConstantFrameOffset) {
  test::Rng rng(12);
  const Trajectory gt = random_trajectory(rng, 20);
  const PoseSE3 offset = test::random_pose(rng, 5.0, 2.0);
  Trajectory est = gt;
  for (auto& s : est) s.pose = offset * s.pose;
  const AssociatedPoses anchored = anchor_to_first(gather(est, gt, associate(est, gt)));
  for (std::size_t k = 0; k < anchored.est.size(); ++k) {
    EXPECT_LT(test::translation_error(anchored.est[k], anchored.gt[k]), 1e-9);
    EXPECT_LT(test::rotation_error(anchored.est[k], anchored.gt[k]), 1e-9);
  }
}

TEST(TrajectoryIo, RoundTripAndErrors) {
  test::Rng rng(13);
  const Trajectory gt = random_trajectory(rng, 10);
  test::TempDir dir("traj");
  write_trajectory(dir.path() / "t.txt", gt);
  const Trajectory back = read_trajectory(dir.path() / "t.txt");
  ASSERT_EQ(back.size(), gt.size());
  for (std::size_t k = 0; k < gt.size(); ++k) {
    EXPECT_NEAR(back[k].t, gt[k].t, 1e-9);
    EXPECT_LT(test::translation_error(back[k].pose, gt[k].pose), 1e-8);
    EXPECT_LT(test::rotation_error(back[k].pose, gt[k].pose), 1e-8);
  }
  {
    std::ofstream os(dir.path() / "bad.txt");
    os << "# header\n\n0 0 0 0 0 0 0 1\n0.1 0 0 0 0 0 1\n";
  }
  try {
    read_trajectory(dir.path() / "bad.txt");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u) << e.what();
  }
  {
    std::ofstream os(dir.path() / "order.txt");
    os << "0.1 0 0 0 0 0 0 1\n0.1 0 0 0 0 0 0 1\n";
  }
  EXPECT_THROW(read_trajectory(dir.path() / "order.txt"), ParseError);
  Trajectory unordered{{1.0, PoseSE3::identity()}, {0.5, PoseSE3::identity()}};
  EXPECT_THROW(validate_trajectory(unordered), DomainError);
}

}  // namespace
}  // namespace ringlio

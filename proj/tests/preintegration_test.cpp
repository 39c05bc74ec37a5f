#include <cmath>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "ringlio/errors.hpp"
#include "ringlio/preintegration.hpp"
#include "test_support.hpp"

namespace ringlio {
namespace {

namespace pi = pim_index;
using Vec9 = Eigen::Matrix<double, 9, 1>;

Pim integrate_all(const std::vector<ImuSample>& s, std::size_t begin, std::size_t end, const Vec3& ba,
                  const Vec3& bg, const NoiseParams& n = {}) {
  Pim p = Pim::at_bias(ba, bg);
  for (std::size_t k = begin; k + 1 <= end && k + 1 < s.size(); ++k) p = pim_integrate(p, s[k], s[k + 1], n);
  return p;
}

Pim integrate_all(const std::vector<ImuSample>& s, const Vec3& ba, const Vec3& bg, const NoiseParams& n = {}) {
  return integrate_all(s, 0, s.size() - 1, ba, bg, n);
}

Vec9 increment_difference(const Pim& a, const Pim& b) {
  Vec9 d;
  d.segment<3>(pi::kP) = b.delta_p - a.delta_p;
  d.segment<3>(pi::kV) = b.delta_v - a.delta_v;
  d.segment<3>(pi::kTheta) = so3_log(a.delta_q.inverse() * b.delta_q);
  return d;
}

TEST(Pim, FreshIsIdentityIncrement) {
  const Pim p = Pim::at_bias(Vec3(0.1, 0, 0), Vec3(0, 0.01, 0));
  EXPECT_TRUE(p.delta_p.isZero(0.0));
  EXPECT_TRUE(p.delta_v.isZero(0.0));
  EXPECT_EQ(p.delta_q.wxyz(), Vec4(1, 0, 0, 0));
  EXPECT_EQ(p.delta_t, 0.0);
  EXPECT_EQ(p.ba_lin, Vec3(0.1, 0, 0));
}

TEST(PimIntegrate, StationaryClosedForm) {
  std::vector<ImuSample> s;
  for (int k = 0; k <= 200; ++k) s.push_back({k * 0.005, Vec3(0, 0, 9.81), Vec3::Zero()});
  const Pim p = integrate_all(s, Vec3::Zero(), Vec3::Zero());
  EXPECT_LT(rotation_angle(p.delta_q), 1e-12);
  EXPECT_LT((p.delta_v - Vec3(0, 0, 9.81)).norm(), 1e-6);
  EXPECT_LT((p.delta_p - Vec3(0, 0, 4.905)).norm(), 1e-6);
  EXPECT_NEAR(p.delta_t, 1.0, 1e-12);

  ImuState x;
  x.p = Vec3(1, 2, 3);
  x.v = Vec3(0, 0, 0);
  const PredictedMotion m = pim_predict(x, p, NoiseParams{}.gravity);
  EXPECT_LT((m.p - x.p).norm(), 1e-9);
  EXPECT_LT(m.v.norm(), 1e-9);
}

TEST(PimIntegrate, RejectsNonPositiveDt) {
  const ImuSample s{1.0, Vec3::Zero(), Vec3::Zero()};
  EXPECT_THROW(pim_integrate(Pim{}, s, s, NoiseParams{}), DomainError);
  EXPECT_THROW(pim_integrate(Pim{}, s, -0.1, NoiseParams{}), DomainError);
}

TEST(PimIntegrate, DeltaTIsSumOfIntervals) {
  test::Rng rng(1);
  const auto s = test::random_imu_stream(rng, 3.0, 1.0, 173.0);
  const Pim p = integrate_all(s, Vec3::Zero(), Vec3::Zero());
  EXPECT_NEAR(p.delta_t, s.back().t - s.front().t, 1e-12);
}

TEST(PimIntegrate, IndependentOfGravity) {
  test::Rng rng(2);
  const auto s = test::random_imu_stream(rng, 0.0, 1.0, 200.0);
  NoiseParams a;
  NoiseParams b;
  b.gravity = Vec3(0.3, -0.2, 9.5);
  const Pim pa = integrate_all(s, Vec3::Zero(), Vec3::Zero(), a);
  const Pim pb = integrate_all(s, Vec3::Zero(), Vec3::Zero(), b);
  EXPECT_EQ(pa.delta_p, pb.delta_p);
  EXPECT_EQ(pa.delta_v, pb.delta_v);
  EXPECT_EQ(pa.delta_q.wxyz(), pb.delta_q.wxyz());
  EXPECT_EQ(pa.cov, pb.cov);
}

TEST(PimPredict, IdentityIncrementLeavesStateUnchanged) {
  test::Rng rng(3);
  const ImuState x = test::random_state(rng);
  const PredictedMotion m = pim_predict(x, Pim{}, Vec3(0, 0, 9.81));
  EXPECT_EQ(m.p, x.p);
  EXPECT_EQ(m.v, x.v);
  EXPECT_LT(rotation_angle(m.q.inverse() * x.q), 1e-15);
}

TEST(PimPredict, EqualsDirectPropagation) {
  test::Rng rng(4);
  const NoiseParams n;
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = test::random_imu_stream(rng, 0.0, 1.0, 200.0);
    ImuState x = test::random_state(rng);
    x.t = 0.0;
    const Pim pim = integrate_all(s, x.ba, x.bg);
    ImuState direct = x;
    for (std::size_t k = 0; k + 1 < s.size(); ++k) direct = propagate_state(direct, s[k], s[k + 1], n);
    const PredictedMotion m = pim_predict(x, pim, n.gravity);
    EXPECT_LT((m.p - direct.p).norm(), 1e-9);
    EXPECT_LT((m.v - direct.v).norm(), 1e-9);
    EXPECT_LT(rotation_angle(m.q.inverse() * direct.q), 1e-9);
  }
}

TEST(PimPredict, ChainedSplitEqualsOneShot) {
  test::Rng rng(5);
  const Vec3 g(0, 0, 9.81);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = test::random_imu_stream(rng, 0.0, 1.0, 200.0);
    const ImuState x = test::random_state(rng);
    const std::size_t mid = 37 + static_cast<std::size_t>(trial) * 5;
    const Pim whole = integrate_all(s, x.ba, x.bg);
    const Pim first = integrate_all(s, 0, mid, x.ba, x.bg);
    const Pim second = integrate_all(s, mid, s.size() - 1, x.ba, x.bg);
    const PredictedMotion a = pim_predict(x, whole, g);
    ImuState y = x;
    const PredictedMotion h = pim_predict(x, first, g);
    y.p = h.p;
    y.v = h.v;
    y.q = h.q;
    const PredictedMotion b = pim_predict(y, second, g);
    EXPECT_LT((a.p - b.p).norm(), 1e-9);
    EXPECT_LT((a.v - b.v).norm(), 1e-9);
    EXPECT_LT(rotation_angle(a.q.inverse() * b.q), 1e-9);
  }
}

TEST(PimCorrectBias, ZeroCorrectionIsNoOp) {
  test::Rng rng(6);
  const auto s = test::random_imu_stream(rng, 0.0, 1.0, 200.0);
  const Pim p = integrate_all(s, Vec3(0.01, 0, 0), Vec3::Zero());
  const Pim c = pim_correct_bias(p, Vec3::Zero(), Vec3::Zero());
  EXPECT_EQ(c.delta_p, p.delta_p);
  EXPECT_EQ(c.delta_v, p.delta_v);
  EXPECT_LT(rotation_angle(c.delta_q.inverse() * p.delta_q), 1e-15);
}

TEST(PimCorrectBias, MatchesReintegrationForSmallShifts) {
  test::Rng rng(7);
  const auto s = test::random_imu_stream(rng, 0.0, 1.0, 200.0);
  const Vec3 ba(0.02, -0.01, 0.03);
  const Vec3 bg(0.001, 0.002, -0.001);
  const Pim p = integrate_all(s, ba, bg);

  const Vec3 dbg(1e-3, 0, 0);
  const Pim g_fast = pim_correct_bias(p, Vec3::Zero(), dbg);
  const Pim g_slow = integrate_all(s, ba, bg + dbg);
  EXPECT_LT(rotation_angle(g_fast.delta_q.inverse() * g_slow.delta_q), 1e-6);

  const Vec3 dba(1e-2, 0, 0);
  const Pim a_fast = pim_correct_bias(p, dba, Vec3::Zero());
  const Pim a_slow = integrate_all(s, ba + dba, bg);
  EXPECT_LT((a_fast.delta_p - a_slow.delta_p).norm(), 1e-5);
  EXPECT_LT((a_fast.delta_v - a_slow.delta_v).norm(), 1e-5);
  EXPECT_EQ(a_fast.ba_lin, ba + dba);
}

TEST(PimCorrectBias, BiasJacobianMatchesFiniteDifferences) {
  test::Rng rng(8);
  const auto s = test::random_imu_stream(rng, 0.0, 0.5, 200.0);
  const Vec3 ba = test::random_vec3(rng, 0.05);
  const Vec3 bg = test::random_vec3(rng, 0.01);
  const Pim p = integrate_all(s, ba, bg);
  const double h = 1e-6;
  for (int c = 0; c < 6; ++c) {
    Vec3 dba = Vec3::Zero();
    Vec3 dbg = Vec3::Zero();
    (c < 3 ? dba : dbg)[c % 3] = h;
    const Pim plus = integrate_all(s, ba + dba, bg + dbg);
    const Pim minus = integrate_all(s, ba - dba, bg - dbg);
    const Vec9 fd = (increment_difference(p, plus) - increment_difference(p, minus)) / (2 * h);
    EXPECT_LT((fd - p.bias_jacobian.col(c)).norm(), 1e-6 * std::max(1.0, fd.norm())) << "column " << c;
  }
}

TEST(PimCorrectBias, ErrorScalesQuadratically) {
  test::Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = test::random_imu_stream(rng, 0.0, 1.0, 200.0);
    const Pim p = integrate_all(s, Vec3::Zero(), Vec3::Zero());
    const Vec3 dba = test::random_vec3(rng, 0.05);
    const Vec3 dbg = test::random_vec3(rng, 0.005);
    auto mismatch = [&](double scale) {
      const Pim fast = pim_correct_bias(p, scale * dba, scale * dbg);
      const Pim slow = integrate_all(s, scale * dba, scale * dbg);
      return increment_difference(slow, fast).norm();
    };
    EXPECT_NEAR(mismatch(2.0) / mismatch(1.0), 4.0, 0.8);
  }
}

TEST(PimCovariance, SymmetricPsdAndGrowing) {
  test::Rng rng(10);
  const auto s = test::random_imu_stream(rng, 0.0, 2.0, 200.0);
  const NoiseParams n;
  Pim p;
  double trace = 0.0;
  for (std::size_t k = 0; k + 1 < s.size(); ++k) {
    p = pim_integrate(p, s[k], s[k + 1], n);
    EXPECT_GT(p.cov.trace(), trace);
    trace = p.cov.trace();
  }
  EXPECT_EQ(p.cov, p.cov.transpose());
  const Eigen::SelfAdjointEigenSolver<Mat9> eig(p.cov);
  EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
  EXPECT_TRUE(bias_correction_is_large(Vec3(0.2, 0, 0), Vec3::Zero()));
  EXPECT_FALSE(bias_correction_is_large(Vec3(0.05, 0, 0), Vec3(0, 0.01, 0)));
}

}  // namespace
}  // namespace ringlio

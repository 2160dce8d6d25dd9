#include <gtest/gtest.h>

#include <cmath>

#include "flowvs/errors.hpp"
#include "flowvs/geometry.hpp"
#include "flowvs/rng.hpp"
#include "oracles.hpp"

namespace flowvs {
namespace {

using oracle::kPi;

TEST(ExpTwist, ZeroIsIdentity) {
  EXPECT_EQ(exp_twist(Twist(), 1.0), Pose::Identity());
}

TEST(ExpTwist, PureTranslation) {
  const Pose p = exp_twist(Twist(Vec3(1, 0, 0), Vec3::Zero()), 2.0);
  EXPECT_EQ(p.rotation, Mat3::Identity());
  EXPECT_NEAR((p.translation - Vec3(2, 0, 0)).norm(), 0.0, 1e-15);
}

TEST(ExpTwist, QuarterTurnAboutZ) {
  const Pose p = exp_twist(Twist(Vec3::Zero(), Vec3(0, 0, kPi / 2)), 1.0);
  EXPECT_NEAR(p.rotation(0, 1), -1.0, 1e-12);
  EXPECT_LT((p.rotation - oracle::quat_rotation(Vec3::UnitZ(), kPi / 2)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(p.translation.norm(), 1e-15);
}

TEST(ExpTwist, MatchesDenseMatrixExponential) {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const Vec3 v(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
    const Vec3 w = rng.unit_vector() * rng.uniform(0.0, 3.0);
    const double dt = rng.uniform(0.1, 1.0);
    EXPECT_LT(oracle::max_abs_diff(exp_twist(Twist(v, w), dt), oracle::matrix_exp(v * dt, w * dt)), 1e-11);
  }
}

TEST(ExpTwist, ContinuousAcrossSmallAngleSwitch) {
  const Vec3 v(0.3, -0.2, 0.5);
  const Vec3 axis = Vec3(1, 2, 3).normalized();
  for (double a : {1e-4, 1e-6, 1.1e-8, 0.9e-8, 1e-10}) {
    const Pose p = exp_twist(Twist(v, axis * a), 1.0);
    EXPECT_LT(oracle::max_abs_diff(p, oracle::matrix_exp(v, axis * a)), 1e-14) << a;
  }
}

TEST(ExpTwist, RejectsBadInput) {
  EXPECT_THROW(exp_twist(Twist(Vec3(NAN, 0, 0), Vec3::Zero()), 1.0), InvalidArgument);
  EXPECT_THROW(exp_twist(Twist(Vec3::Zero(), Vec3(0, INFINITY, 0)), 1.0), InvalidArgument);
  EXPECT_THROW(exp_twist(Twist(), -1.0), InvalidArgument);
}

TEST(LogPose, IdentityIsZero) {
  EXPECT_EQ(log_pose(Pose::Identity()).vector(), Vec6::Zero());
}

TEST(LogPose, QuarterTurnAboutZ) {
  const Twist t = log_pose(Pose(oracle::quat_rotation(Vec3::UnitZ(), kPi / 2), Vec3::Zero()));
  EXPECT_LT((t.angular - Vec3(0, 0, kPi / 2)).norm(), 1e-9);
  EXPECT_LT(t.linear.norm(), 1e-12);
}

TEST(LogPose, HalfTurn) {
  for (const Vec3& axis : {Vec3(1, 0, 0), Vec3(0, 1, 1), Vec3(-1, 2, 0.5)}) {
    const Pose p(oracle::quat_rotation(axis, kPi), Vec3(0.4, -1, 2));
    const Twist t = log_pose(p);
    EXPECT_NEAR(t.angular.norm(), kPi, 1e-9);
    EXPECT_LT(oracle::max_abs_diff(exp_twist(t, 1.0), p), 1e-9);
  }
}

TEST(LogPose, NearHalfTurn) {
  for (double eps : {1e-3, 1e-6, 1e-9, 1e-11}) {
    const Pose p(oracle::quat_rotation(Vec3(0.3, -0.5, 0.8), kPi - eps), Vec3(1, 2, 3));
    EXPECT_LT(oracle::max_abs_diff(exp_twist(log_pose(p), 1.0), p), 1e-9) << eps;
  }
}

TEST(LogPose, RejectsInvalidRotation) {
  Mat3 bad = Mat3::Identity();
  bad(0, 0) = 2.0;
  EXPECT_THROW(log_pose(Pose(bad, Vec3::Zero())), InvalidArgument);
  EXPECT_THROW(log_pose(Pose(-Mat3::Identity(), Vec3::Zero())), InvalidArgument);
}

TEST(LogPose, RandomPosesRoundTrip) {
  Rng rng(2024);
  for (int i = 0; i < 1000; ++i) {
    const Pose p = oracle::random_pose(rng);
    const Twist t = log_pose(p);
    EXPECT_LE(t.angular.norm(), kPi + 1e-12);
    ASSERT_LT(oracle::max_abs_diff(exp_twist(t, 1.0), p), 1e-9) << i;
  }
}

TEST(LogPose, RandomTwistsRoundTrip) {
  Rng rng(77);
  for (int i = 0; i < 1000; ++i) {
    // Twists with norm <= pi - 0.1 so the angular part stays on the principal branch.
    Vec6 xi;
    for (int j = 0; j < 6; ++j) xi(j) = rng.normal();
    xi *= rng.uniform(0.0, kPi - 0.1) / xi.norm();
    const Twist back = log_pose(exp_twist(Twist::FromVector(xi), 1.0));
    ASSERT_LT((back.vector() - xi).cwiseAbs().maxCoeff(), 1e-9) << i;
  }
}

TEST(ExpTwist, CompositionAlongFixedScrewAxis) {
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const double a = rng.uniform(0.0, 1.5), b = rng.uniform(0.0, 1.5);
    const Twist rot(Vec3::Zero(), rng.unit_vector() * rng.uniform(0.0, 1.0));
    const Twist tr(rng.unit_vector() * rng.uniform(0.0, 2.0), Vec3::Zero());
    for (const Twist& xi : {rot, tr})
      EXPECT_LT(oracle::max_abs_diff(exp_twist(xi, a + b), exp_twist(xi, a) * exp_twist(xi, b)), 1e-9);
  }
}

TEST(PoseError, Identical) {
  const Pose p(oracle::quat_rotation(Vec3(1, 1, 0), 0.3), Vec3(1, 2, 3));
  const PoseError e = pose_error(p, p);
  EXPECT_EQ(e.t_err, 0.0);
  EXPECT_EQ(e.r_err, 0.0);
}

TEST(PoseError, ThreeFourFive) {
  const PoseError e = pose_error(Pose(Mat3::Identity(), Vec3(0.03, 0, 0.04)), Pose());
  EXPECT_NEAR(e.t_err, 0.05, 1e-15);
  EXPECT_EQ(e.r_err, 0.0);
}

TEST(PoseError, TwentyFiveDegreesAboutY) {
  const Pose a(oracle::quat_rotation(Vec3(0.2, 0.1, 1), 0.4), Vec3(1, 0, 0));
  const Pose b(a.rotation * oracle::quat_rotation(Vec3::UnitY(), oracle::rad(25)), a.translation);
  const PoseError e = pose_error(a, b);
  EXPECT_EQ(e.t_err, 0.0);
  EXPECT_NEAR(e.r_err, 25.0, 1e-9);
}

TEST(PoseError, Symmetric) {
  Rng rng(9);
  for (int i = 0; i < 500; ++i) {
    const Pose a = oracle::random_pose(rng), b = oracle::random_pose(rng);
    const PoseError ab = pose_error(a, b), ba = pose_error(b, a);
    EXPECT_EQ(ab.t_err, ba.t_err);
    EXPECT_NEAR(ab.r_err, ba.r_err, 1e-12);
  }
}

TEST(Pose, RelativeOfEqualPosesIsExactIdentity) {
  Rng rng(1);
  const Pose p = oracle::random_pose(rng);
  EXPECT_EQ(relative(p, p), Pose::Identity());
}

TEST(Pose, Validity) {
  EXPECT_TRUE(Pose().isValid());
  Mat3 r = oracle::quat_rotation(Vec3(1, 0, 0), 0.5);
  EXPECT_TRUE(Pose(r, Vec3::Zero()).isValid());
  r(0, 0) += 1e-6;
  EXPECT_FALSE(Pose(r, Vec3::Zero()).isValid());
  EXPECT_FALSE(Pose(Mat3::Identity(), Vec3(NAN, 0, 0)).isValid());
}

TEST(Project, PrincipalPoint) {
  Intrinsics k{500, 500, 320, 240, 640, 480};
  EXPECT_EQ(project(Vec3(0, 0, 1), k), Vec2(320, 240));
}

TEST(Project, HandEvaluated) {
  Intrinsics k{500, 500, 320, 240, 640, 480};
  EXPECT_DOUBLE_EQ(project(Vec3(1, 0, 2), k).x(), 570.0);
  const Vec2 px = project(Vec3(0.1, -0.2, 0.5), k);
  EXPECT_NEAR(px.x(), 420.0, 1e-12);
  EXPECT_NEAR(px.y(), 40.0, 1e-12);
  // Cast the ray back through the pixel: it passes through the point.
  const Vec3 ray = unproject(px, 1.0, k);
  EXPECT_LT((ray * 0.5 - Vec3(0.1, -0.2, 0.5)).norm(), 1e-12);
}

TEST(Project, BehindCamera) {
  const Intrinsics k;
  EXPECT_THROW(project(Vec3(0, 0, 0), k), BehindCamera);
  EXPECT_THROW(project(Vec3(1, 1, -2), k), BehindCamera);
}

TEST(Project, UnprojectRoundTrip) {
  const Intrinsics k;
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Vec2 px(rng.uniform(0, k.width), rng.uniform(0, k.height));
    const double z = rng.uniform(0.1, 50.0);
    EXPECT_LT((project(unproject(px, z, k), k) - px).norm(), 1e-9);
  }
}

TEST(Intrinsics, Validity) {
  EXPECT_TRUE(Intrinsics::Default().isValid());
  EXPECT_FALSE((Intrinsics{0, 100, 80, 60, 160, 120}.isValid()));
  EXPECT_FALSE((Intrinsics{100, 100, 160, 60, 160, 120}.isValid()));
  EXPECT_FALSE((Intrinsics{100, 100, 80, -1, 160, 120}.isValid()));
}

}  // namespace
}  // namespace flowvs

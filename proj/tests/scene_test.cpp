#include <gtest/gtest.h>

#include <cmath>

#include "flowvs/errors.hpp"
#include "flowvs/scene.hpp"
#include "oracles.hpp"

namespace flowvs {
namespace {

TEST(GenerateScene, Deterministic) {
  for (auto v : {SceneVariant::PointCloud, SceneVariant::TexturedPlane}) {
    EXPECT_TRUE(generate_scene(42, v) == generate_scene(42, v));
    EXPECT_FALSE(generate_scene(42, v) == generate_scene(43, v));
  }
}

TEST(GenerateScene, PointCloudContract) {
  SceneParams p;
  p.num_points = 1000;
  const Scene s = generate_scene(7, SceneVariant::PointCloud, p);
  ASSERT_EQ(s.cloud().points.size(), 1000u);
  for (const auto& pt : s.cloud().points) {
    EXPECT_TRUE(s.bounds().contains(pt.position));
    EXPECT_TRUE(pt.position.allFinite());
    EXPECT_GE(pt.intensity, 0.0);
    EXPECT_LE(pt.intensity, 1.0);
  }
  // Box spans at least 4 m per axis and starts at least 2 m in front of the camera.
  EXPECT_TRUE(((s.bounds().max - s.bounds().min).array() >= 4.0).all());
  EXPECT_GE(s.bounds().min.z(), 2.0);
}

TEST(GenerateScene, PlaneContract) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Scene s = generate_scene(seed, SceneVariant::TexturedPlane);
    const TexturedPlane& pl = s.plane();
    EXPECT_NEAR(pl.normal.norm(), 1.0, 1e-12);
    EXPECT_GE(pl.texture.terms().size(), 8u);
    // Texture at plane coordinate (0,0) is the DC term plus A_k sin(phi_k).
    double expect = 0.5;
    for (const auto& t : pl.texture.terms()) expect += t.amplitude * std::sin(t.phase);
    expect = std::clamp(expect, 0.0, 1.0);
    EXPECT_NEAR(pl.texture(Vec2::Zero()), expect, 1e-15);
  }
}

TEST(GenerateScene, RejectsBadParams) {
  SceneParams p;
  p.num_points = 499;
  EXPECT_THROW(generate_scene(1, SceneVariant::PointCloud, p), InvalidArgument);
  p.num_points = 100001;
  EXPECT_THROW(generate_scene(1, SceneVariant::PointCloud, p), InvalidArgument);
  p = {};
  p.box_max = p.box_min;
  EXPECT_THROW(generate_scene(1, SceneVariant::PointCloud, p), InvalidArgument);
  p = {};
  p.texture_terms = 7;
  EXPECT_THROW(generate_scene(1, SceneVariant::TexturedPlane, p), InvalidArgument);
  p = {};
  p.plane_distance_min = -1;
  EXPECT_THROW(generate_scene(1, SceneVariant::TexturedPlane, p), InvalidArgument);
}

TEST(Texture, ClampedToUnitInterval) {
  std::vector<Sinusoid> terms(8, Sinusoid{0.2, Vec2(1.0, 0.0), 0.0});
  const ProceduralTexture tex(terms);
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const double v = tex(Vec2(rng.uniform(-5, 5), rng.uniform(-5, 5)));
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  EXPECT_EQ(tex(Vec2(0.25, 0)), 1.0);  // raw value 2.1
}

TEST(Texture, GradientMatchesFiniteDifferences) {
  Rng rng(8);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ProceduralTexture& tex = generate_scene(seed, SceneVariant::TexturedPlane).plane().texture;
    for (int i = 0; i < 50; ++i) {
      const Vec2 q(rng.uniform(-10, 10), rng.uniform(-10, 10));
      const double h = 1e-5;
      const Vec2 fd((tex.raw(q + Vec2(h, 0)) - tex.raw(q - Vec2(h, 0))) / (2 * h),
                    (tex.raw(q + Vec2(0, h)) - tex.raw(q - Vec2(0, h))) / (2 * h));
      EXPECT_LT((tex.gradient(q) - fd).cwiseAbs().maxCoeff(), 1e-6);
    }
  }
}

TEST(QueryDepth, FrontalPlane) {
  const Scene s = oracle::frontal_plane(2.0);
  const Intrinsics k;
  EXPECT_DOUBLE_EQ(*query_depth(s, Pose(), Vec2(k.cx, k.cy), k), 2.0);
  // 45 degrees off-axis: z-depth, not ray length.
  EXPECT_DOUBLE_EQ(*query_depth(s, Pose(), Vec2(k.cx + k.fx - 1e-9, k.cy), k), 2.0);
}

TEST(QueryDepth, MissesBehindOrParallel) {
  const Scene s = oracle::frontal_plane(2.0);
  const Intrinsics k;
  // Camera beyond the plane, looking away from it.
  EXPECT_FALSE(query_depth(s, Pose(Mat3::Identity(), Vec3(0, 0, 3)), Vec2(k.cx, k.cy), k));
  // Camera looking along the plane: the principal ray is parallel to it.
  const Pose sideways(oracle::quat_rotation(Vec3::UnitY(), oracle::kPi / 2), Vec3::Zero());
  EXPECT_FALSE(query_depth(s, sideways, Vec2(k.cx, k.cy), k));
}

TEST(QueryDepth, TiltedPlaneMatchesRayOracle) {
  const Intrinsics k;
  Rng rng(31);
  int hits = 0, misses = 0;
  for (int i = 0; i < 10000; ++i) {
    if (i % 100 == 0) rng = Rng(static_cast<std::uint64_t>(i));
    const Scene s = generate_scene(static_cast<std::uint64_t>(i / 100), SceneVariant::TexturedPlane);
    const Pose cam(oracle::quat_rotation(rng.unit_vector(), rng.uniform(0.0, 0.5)),
                   Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)));
    const Vec2 px(rng.uniform(0, k.width), rng.uniform(0, k.height));
    const auto z = query_depth(s, cam, px, k);
    const auto ref =
        oracle::ray_plane_depth(cam, px, k, s.plane().normal, s.plane().offset, &s.plane());
    ASSERT_EQ(z.has_value(), ref.has_value()) << i;
    if (!ref) {
      ++misses;
      continue;
    }
    EXPECT_NEAR(*z, *ref, 1e-9 * std::max(1.0, *ref));
    ++hits;
  }
  EXPECT_GT(hits, 9000);
  EXPECT_EQ(hits + misses, 10000);
}

TEST(QueryDepth, PointCloudMatchesNearestProjection) {
  SceneParams p;
  p.num_points = 2000;
  const Scene s = generate_scene(5, SceneVariant::PointCloud, p);
  const Intrinsics k;
  const Pose cam(oracle::quat_rotation(Vec3(0, 1, 0), 0.1), Vec3(0.2, -0.1, 0.3));
  const SceneView view(s, cam, k);
  Rng rng(6);
  for (int i = 0; i < 2000; ++i) {
    const Vec2 px(rng.uniform(0, k.width), rng.uniform(0, k.height));
    // Brute force: frontmost point projecting within the match radius.
    std::optional<double> best;
    for (const auto& pt : s.cloud().points) {
      const Vec3 q = cam.inverse() * pt.position;
      if (q.z() <= 0) continue;
      const Vec2 u = project(q, k);
      if ((u - px).norm() <= kPointMatchRadius && (!best || q.z() < *best)) best = q.z();
    }
    const auto z = view.depth(px);
    ASSERT_EQ(z.has_value(), best.has_value()) << i;
    if (z) EXPECT_NEAR(*z, *best, 1e-9);
  }
}

TEST(QueryIntensity, PlaneTexture) {
  const Scene s = oracle::frontal_plane(3.0);
  const Intrinsics k;
  const Vec2 px(30, 90);
  const Vec3 hit = unproject(px, 3.0, k);
  EXPECT_NEAR(*query_intensity(s, Pose(), px, k), s.plane().texture(s.plane().plane_coords(hit)), 1e-12);
}

class SampleTaskBands : public ::testing::TestWithParam<Difficulty> {};

TEST_P(SampleTaskBands, OffsetsInBandAndObservable) {
  const Difficulty d = GetParam();
  const DifficultyBand band = difficulty_band(d);
  const Intrinsics k;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    for (auto v : {SceneVariant::PointCloud, SceneVariant::TexturedPlane}) {
      auto scene = std::make_shared<const Scene>(generate_scene(seed + 100, v));
      const ServoTask t = sample_task(seed, d, scene, k);
      const PoseError e = pose_error(t.initial_pose, t.desired_pose);
      EXPECT_GE(e.t_err, band.t_min - 1e-9);
      EXPECT_LE(e.t_err, band.t_max + 1e-9);
      EXPECT_GE(e.r_err, band.r_min - 1e-6);
      EXPECT_LE(e.r_err, band.r_max + 1e-6);
      EXPECT_GE(observed_fraction(*scene, t.desired_pose, k), kMinObservedFraction);
      EXPECT_TRUE(t.initial_pose.isValid());
      EXPECT_TRUE(t.desired_pose.isValid());
      EXPECT_EQ(t.difficulty, d);
      if (d == Difficulty::Hard) EXPECT_TRUE(e.t_err >= 2.0 || e.r_err >= 30.0);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(All, SampleTaskBands,
                         ::testing::Values(Difficulty::Easy, Difficulty::Medium, Difficulty::Hard),
                         [](const auto& info) { return to_string(info.param); });

TEST(SampleTask, BandsAsDeclared) {
  const DifficultyBand e = difficulty_band(Difficulty::Easy);
  EXPECT_EQ(e.t_min, 1.0);
  EXPECT_EQ(e.t_max, 1.4);
  EXPECT_EQ(e.r_min, 5.0);
  EXPECT_EQ(e.r_max, 15.0);
  const DifficultyBand m = difficulty_band(Difficulty::Medium);
  EXPECT_EQ(m.t_min, 1.4);
  EXPECT_EQ(m.t_max, 1.6);
  EXPECT_EQ(m.r_min, 15.0);
  EXPECT_EQ(m.r_max, 25.0);
  const DifficultyBand h = difficulty_band(Difficulty::Hard);
  EXPECT_EQ(h.t_min, 2.0);
  EXPECT_EQ(h.t_max, 3.0);
  EXPECT_EQ(h.r_min, 30.0);
  EXPECT_EQ(h.r_max, 50.0);
}

TEST(SampleTask, Deterministic) {
  auto scene = std::make_shared<const Scene>(generate_scene(3, SceneVariant::PointCloud));
  const ServoTask a = sample_task(9, Difficulty::Medium, scene);
  const ServoTask b = sample_task(9, Difficulty::Medium, scene);
  EXPECT_EQ(a.initial_pose, b.initial_pose);
  EXPECT_EQ(a.desired_pose, b.desired_pose);
  EXPECT_EQ(a.seed, b.seed);
}

TEST(SampleTask, UnobservableSceneFails) {
  // A plane far behind every sampled goal pose can never fill the grid.
  SceneParams p;
  p.plane_half_extent = 0.01;
  auto scene = std::make_shared<const Scene>(generate_scene(1, SceneVariant::TexturedPlane, p));
  EXPECT_THROW(sample_task(1, Difficulty::Easy, scene), TaskGenerationError);
  EXPECT_THROW(sample_task(1, Difficulty::Easy, nullptr), InvalidArgument);
}

TEST(Strings, RoundTrip) {
  for (auto d : {Difficulty::Easy, Difficulty::Medium, Difficulty::Hard})
    EXPECT_EQ(difficulty_from_string(to_string(d)), d);
  for (auto v : {SceneVariant::PointCloud, SceneVariant::TexturedPlane})
    EXPECT_EQ(scene_variant_from_string(to_string(v)), v);
  EXPECT_THROW(difficulty_from_string("extreme"), InvalidArgument);
  EXPECT_THROW(scene_variant_from_string("mesh"), InvalidArgument);
}

}  // namespace
}  // namespace flowvs

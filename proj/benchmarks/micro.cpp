#include <benchmark/benchmark.h>

#include <memory>

#include "flowvs/control.hpp"
#include "flowvs/geometry.hpp"
#include "flowvs/observation.hpp"
#include "flowvs/rng.hpp"
#include "flowvs/scene.hpp"
#include "flowvs/servo.hpp"

namespace flowvs {
namespace {

const Intrinsics kK = Intrinsics::Default();

void BM_ExpLog(benchmark::State& state) {
  const Twist xi(Vec3(0.3, -0.2, 0.5), Vec3(0.4, 0.1, -0.7));
  for (auto _ : state) {
    const Pose p = exp_twist(xi, 1.0);
    benchmark::DoNotOptimize(log_pose(p));
  }
}
BENCHMARK(BM_ExpLog);

void BM_StackInteraction(benchmark::State& state) {
  const FeatureGrid grid(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)), kK);
  const Scene scene = generate_scene(1, SceneVariant::TexturedPlane);
  const DepthMap depth = true_depth(scene, Pose(), grid, kK);
  for (auto _ : state) benchmark::DoNotOptimize(stack_interaction(grid, depth, kK));
}
BENCHMARK(BM_StackInteraction)->Arg(16)->Arg(32)->Arg(64);

void BM_LmVelocity(benchmark::State& state) {
  Rng rng(1);
  const int rows = static_cast<int>(state.range(0));
  Eigen::MatrixXd L(rows, 6);
  Eigen::VectorXd e(rows);
  for (int i = 0; i < rows; ++i) {
    e(i) = rng.normal();
    for (int j = 0; j < 6; ++j) L(i, j) = rng.normal();
  }
  const ControllerConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(lm_velocity(L, e, cfg));
}
BENCHMARK(BM_LmVelocity)->Arg(64)->Arg(2048);

void BM_OracleFlow(benchmark::State& state) {
  const auto variant = state.range(0) ? SceneVariant::PointCloud : SceneVariant::TexturedPlane;
  const Scene scene = generate_scene(2, variant);
  const FeatureGrid grid(kK);
  const Pose a, b(Mat3::Identity(), Vec3(0.1, 0.05, 0.2));
  for (auto _ : state) benchmark::DoNotOptimize(oracle_flow(scene, a, b, grid, kK));
  state.SetLabel(state.range(0) ? "point-cloud" : "plane");
}
BENCHMARK(BM_OracleFlow)->Arg(0)->Arg(1);

void BM_ServoRun(benchmark::State& state) {
  const ServoTask task = sample_task(
      3, Difficulty::Easy, std::make_shared<const Scene>(generate_scene(4, SceneVariant::PointCloud)));
  const MethodSpec method{Method::FlowTrueDepth, {}, {}};
  for (auto _ : state) benchmark::DoNotOptimize(run_servo(task, method, ControllerConfig{}));
}
BENCHMARK(BM_ServoRun)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace flowvs

BENCHMARK_MAIN();

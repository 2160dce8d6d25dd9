#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "flowvs/scene.hpp"
#include "flowvs/servo.hpp"

namespace flowvs {

struct SuiteTask {
  std::string id;  // e.g. "medium-002"
  ServoTask task;
};

/// n seeded tasks of one difficulty. Each task gets its own scene; task i is a
/// pure function of (master_seed, difficulty, i).
std::vector<SuiteTask> make_suite(Difficulty difficulty, int n, std::uint64_t master_seed,
                                  SceneVariant variant, const SceneParams& params = {},
                                  const Intrinsics& k = Intrinsics::Default());

/// Default task counts when no per-suite count is given: ten tasks for a
/// single suite, 3 easy / 4 medium / 3 hard for the full benchmark.
int default_suite_size(Difficulty d, bool full_benchmark);

struct BenchConfig {
  std::vector<Difficulty> suites{Difficulty::Easy};
  bool full_benchmark = false;  // `--suite all`
  int n = -1;                   // tasks per suite; < 0 selects default_suite_size
  std::vector<MethodSpec> methods{MethodSpec{}};
  std::uint64_t seed = 0;
  SceneVariant variant = SceneVariant::PointCloud;
  SceneParams scene_params;
  ControllerConfig controller;
  ServoLimits limits;
  SensorConfig sensor;
  unsigned jobs = 0;  // 0 = available parallelism
};

/// One (task, method) result. Real-valued fields hold the values exactly as
/// they appear in the CSV (9 significant digits).
struct BenchRow {
  std::string task_id;
  Difficulty difficulty = Difficulty::Easy;
  std::string method;
  double init_t_err = 0.0;
  double init_r_err = 0.0;
  double final_t_err = 0.0;
  double final_r_err = 0.0;
  double traj_len = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string reason;
};

struct BenchAggregate {
  std::string suite;
  std::string method;
  int tasks = 0;
  int converged = 0;
  double mean_init_t_err = 0.0;
  double mean_init_r_err = 0.0;
  double mean_final_t_err = 0.0;
  double mean_final_r_err = 0.0;
  double mean_traj_len = 0.0;
  double mean_iterations = 0.0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::vector<BenchAggregate> aggregates;
};

BenchReport run_bench(const BenchConfig& cfg);

/// Per (suite, method) means over all rows, in first-appearance order.
std::vector<BenchAggregate> aggregate(const std::vector<BenchRow>& rows);

/// task_id,difficulty,method,init_t_err,init_r_err,final_t_err,final_r_err,
/// traj_len,iterations,converged,reason
std::string bench_report_csv(const BenchReport& report);
std::string bench_summary_csv(const BenchReport& report);
std::string bench_summary_table(const BenchReport& report);
/// Throws FormatError.
std::vector<BenchRow> parse_bench_report(std::string_view csv);

/// Value as stored in the CSV: parse(format_number(v)).
double round_sig9(double v);

struct SweepConfig {
  Vec3 rotation_deg{20.0, 20.0, 40.0};  // about the camera x, y, z axes
  double step = 0.4;                    // meters
  double max = 4.0;                     // meters
  int environments = 16;
  std::uint64_t seed = 0;

  /// Throws InvalidArgument.
  void validate() const;
  /// ceil(max / step), tolerant of representation error in the quotient.
  int batches() const;
};

inline const std::array<Vec3, 3> kSweepPresets{Vec3(10, 10, 25), Vec3(20, 20, 40),
                                               Vec3(30, 30, 50)};

/// Unit direction (initial camera frame) along which the goal is displaced.
/// Chosen so the goal camera, tilted by the x/y set-point rotations, still
/// faces the scene.
inline const Vec3 kSweepOffsetSigns{-1.0, 1.0, 1.0};

/// Goal rotation Rx(a) * Ry(b) * Rz(c) for a set-point in degrees.
Mat3 sweep_rotation(const Vec3& rotation_deg);

/// Task for batch b (1-based) and environment e: the initial camera sits at
/// the origin facing +z; the goal is displaced by b*step along each axis
/// (signs kSweepOffsetSigns) and rotated by the set-point. The point cloud is
/// laid out around both views.
ServoTask make_sweep_task(const SweepConfig& cfg, int batch, int env,
                          const Intrinsics& k = Intrinsics::Default());

struct SweepRow {
  int batch = 0;
  double offset = 0.0;
  std::vector<int> converged;  // per method
  std::vector<double> ratio;   // converged / environments
};

struct SweepResult {
  SweepConfig config;
  std::vector<std::string> methods;
  std::vector<SweepRow> rows;
};

SweepResult run_sweep(const SweepConfig& cfg, const std::vector<MethodSpec>& methods,
                      const ControllerConfig& controller, const ServoLimits& limits = {},
                      const SensorConfig& sensor = {}, unsigned jobs = 0);

/// '#' comment lines describing the protocol, then batch,offset_m,ratio_<method>...
std::string sweep_csv(const SweepResult& result);

}  // namespace flowvs

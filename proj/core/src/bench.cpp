#include "flowvs/bench.hpp"

#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>

#include "flowvs/csv.hpp"
#include "flowvs/errors.hpp"
#include "flowvs/parallel.hpp"
#include "flowvs/rng.hpp"

namespace flowvs {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::uint64_t difficulty_tag(Difficulty d) { return 0xd1f0 + static_cast<std::uint64_t>(d); }

}  // namespace

double round_sig9(double v) { return parse_number(format_number(v)); }

int default_suite_size(Difficulty d, bool full_benchmark) {
  if (!full_benchmark) return 10;
  return d == Difficulty::Medium ? 4 : 3;
}

std::vector<SuiteTask> make_suite(Difficulty difficulty, int n, std::uint64_t master_seed,
                                  SceneVariant variant, const SceneParams& params,
                                  const Intrinsics& k) {
  if (n < 0) throw InvalidArgument("make_suite: negative task count");
  std::vector<SuiteTask> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const std::uint64_t task_seed =
        mix_seed(mix_seed(master_seed, difficulty_tag(difficulty)), static_cast<std::uint64_t>(i));
    auto scene = std::make_shared<const Scene>(generate_scene(mix_seed(task_seed, 1), variant, params));
    char id[32];
    std::snprintf(id, sizeof id, "%s-%03d", to_string(difficulty).c_str(), i);
    out.push_back({id, sample_task(task_seed, difficulty, std::move(scene), k)});
  }
  return out;
}

std::vector<BenchAggregate> aggregate(const std::vector<BenchRow>& rows) {
  std::vector<BenchAggregate> out;
  for (const BenchRow& r : rows) {
    const std::string suite = to_string(r.difficulty);
    auto it = std::find_if(out.begin(), out.end(), [&](const BenchAggregate& a) {
      return a.suite == suite && a.method == r.method;
    });
    if (it == out.end()) {
      out.push_back({});
      it = std::prev(out.end());
      it->suite = suite;
      it->method = r.method;
    }
    ++it->tasks;
    it->converged += r.converged ? 1 : 0;
    it->mean_init_t_err += r.init_t_err;
    it->mean_init_r_err += r.init_r_err;
    it->mean_final_t_err += r.final_t_err;
    it->mean_final_r_err += r.final_r_err;
    it->mean_traj_len += r.traj_len;
    it->mean_iterations += r.iterations;
  }
  for (BenchAggregate& a : out) {
    const double n = a.tasks;
    a.mean_init_t_err /= n;
    a.mean_init_r_err /= n;
    a.mean_final_t_err /= n;
    a.mean_final_r_err /= n;
    a.mean_traj_len /= n;
    a.mean_iterations /= n;
  }
  return out;
}

BenchReport run_bench(const BenchConfig& cfg) {
  cfg.controller.validate();
  if (cfg.methods.empty()) throw InvalidArgument("run_bench: no methods");

  std::vector<SuiteTask> tasks;
  for (Difficulty d : cfg.suites) {
    const int n = cfg.n >= 0 ? cfg.n : default_suite_size(d, cfg.full_benchmark);
    auto suite = make_suite(d, n, cfg.seed, cfg.variant, cfg.scene_params, cfg.sensor.k);
    std::move(suite.begin(), suite.end(), std::back_inserter(tasks));
  }

  const std::size_t n_methods = cfg.methods.size();
  std::vector<BenchRow> rows(tasks.size() * n_methods);
  parallel_for(rows.size(), cfg.jobs, [&](std::size_t job) {
    const SuiteTask& t = tasks[job / n_methods];
    const MethodSpec& m = cfg.methods[job % n_methods];
    const ServoResult r = run_servo(t.task, m, cfg.controller, cfg.limits, cfg.sensor);
    BenchRow& row = rows[job];
    row.task_id = t.id;
    row.difficulty = t.task.difficulty;
    row.method = to_string(m.method);
    row.init_t_err = round_sig9(r.init_t_err);
    row.init_r_err = round_sig9(r.init_r_err);
    row.final_t_err = round_sig9(r.final_t_err);
    row.final_r_err = round_sig9(r.final_r_err);
    row.traj_len = round_sig9(r.traj_len);
    row.iterations = r.iterations;
    row.converged = r.converged;
    row.reason = to_string(r.reason);
  });

  BenchReport report;
  report.rows = std::move(rows);
  report.aggregates = aggregate(report.rows);
  return report;
}

std::string bench_report_csv(const BenchReport& report) {
  std::string out =
      "task_id,difficulty,method,init_t_err,init_r_err,final_t_err,final_r_err,traj_len,"
      "iterations,converged,reason\n";
  for (const BenchRow& r : report.rows) {
    out += r.task_id + ',' + to_string(r.difficulty) + ',' + r.method + ',' +
           format_number(r.init_t_err) + ',' + format_number(r.init_r_err) + ',' +
           format_number(r.final_t_err) + ',' + format_number(r.final_r_err) + ',' +
           format_number(r.traj_len) + ',' + std::to_string(r.iterations) + ',' +
           (r.converged ? "1" : "0") + ',' + r.reason + '\n';
  }
  return out;
}

std::string bench_summary_csv(const BenchReport& report) {
  std::string out =
      "suite,method,tasks,converged,mean_init_t_err,mean_init_r_err,mean_final_t_err,"
      "mean_final_r_err,mean_traj_len,mean_iterations\n";
  for (const BenchAggregate& a : report.aggregates) {
    out += a.suite + ',' + a.method + ',' + std::to_string(a.tasks) + ',' +
           std::to_string(a.converged) + ',' + format_number(a.mean_init_t_err) + ',' +
           format_number(a.mean_init_r_err) + ',' + format_number(a.mean_final_t_err) + ',' +
           format_number(a.mean_final_r_err) + ',' + format_number(a.mean_traj_len) + ',' +
           format_number(a.mean_iterations) + '\n';
  }
  return out;
}

std::string bench_summary_table(const BenchReport& report) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-8s %-20s %5s %5s %9s %9s %9s %9s %9s\n", "suite", "method",
                "conv", "tasks", "I.t_err", "T.err", "R.err", "Tj.len", "Iter");
  out += line;
  for (const BenchAggregate& a : report.aggregates) {
    std::snprintf(line, sizeof line, "%-8s %-20s %5d %5d %9.4f %9.4f %9.3f %9.3f %9.1f\n",
                  a.suite.c_str(), a.method.c_str(), a.converged, a.tasks, a.mean_init_t_err,
                  a.mean_final_t_err, a.mean_final_r_err, a.mean_traj_len, a.mean_iterations);
    out += line;
  }
  return out;
}

std::vector<BenchRow> parse_bench_report(std::string_view csv) {
  const CsvTable t = parse_csv(csv);
  const char* cols[] = {"task_id",    "difficulty", "method",   "init_t_err",
                        "init_r_err", "final_t_err", "final_r_err", "traj_len",
                        "iterations", "converged",  "reason"};
  int idx[11];
  for (int i = 0; i < 11; ++i) {
    idx[i] = t.column(cols[i]);
    if (idx[i] < 0) throw FormatError(std::string("bench report: missing column ") + cols[i], 1);
  }
  std::vector<BenchRow> rows;
  std::size_t line = 1;
  for (const auto& f : t.rows) {
    ++line;
    auto at = [&](int c) -> const std::string& { return f[static_cast<std::size_t>(idx[c])]; };
    BenchRow r;
    r.task_id = at(0);
    try {
      r.difficulty = difficulty_from_string(at(1));
    } catch (const InvalidArgument&) {
      throw FormatError("bench report: bad difficulty '" + at(1) + "'", line);
    }
    r.method = at(2);
    r.init_t_err = parse_number(at(3), line);
    r.init_r_err = parse_number(at(4), line);
    r.final_t_err = parse_number(at(5), line);
    r.final_r_err = parse_number(at(6), line);
    r.traj_len = parse_number(at(7), line);
    r.iterations = static_cast<int>(parse_number(at(8), line));
    r.converged = at(9) == "1";
    r.reason = at(10);
    rows.push_back(std::move(r));
  }
  return rows;
}

void SweepConfig::validate() const {
  if (!(step > 0)) throw InvalidArgument("sweep: step must be > 0");
  if (!(max >= step)) throw InvalidArgument("sweep: max must be >= step");
  if (environments < 1) throw InvalidArgument("sweep: environments must be >= 1");
  if (!rotation_deg.allFinite()) throw InvalidArgument("sweep: non-finite rotation set-point");
}

int SweepConfig::batches() const {
  return static_cast<int>(std::ceil(max / step - 1e-9));
}

Mat3 sweep_rotation(const Vec3& deg) {
  const Eigen::AngleAxisd rx(deg.x() * kDeg, Vec3::UnitX());
  const Eigen::AngleAxisd ry(deg.y() * kDeg, Vec3::UnitY());
  const Eigen::AngleAxisd rz(deg.z() * kDeg, Vec3::UnitZ());
  return (rx * ry * rz).toRotationMatrix();
}

ServoTask make_sweep_task(const SweepConfig& cfg, int batch, int env, const Intrinsics& k) {
  cfg.validate();
  if (batch < 1 || batch > cfg.batches()) throw InvalidArgument("make_sweep_task: bad batch");
  const double offset = batch * cfg.step;
  const Pose initial = Pose::Identity();
  const Pose desired(sweep_rotation(cfg.rotation_deg), offset * kSweepOffsetSigns);

  // Scene: points in a slab around the midpoint of the two cameras' look-at
  // points, wide enough to fill both views.
  const std::uint64_t env_seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(env));
  Rng rng(mix_seed(env_seed, 0x5eed));
  const double look = rng.uniform(6.0, 8.0);
  const Vec3 look0(0, 0, look);
  const Vec3 look1 = desired * Vec3(0, 0, look);
  const Vec3 centre = 0.5 * (look0 + look1);
  const double half_xy = 0.5 * (look1 - look0).head<2>().norm() + 6.0;
  const double half_z = 3.0;

  SceneParams params;
  params.box_min = centre - Vec3(half_xy, half_xy, half_z);
  params.box_max = centre + Vec3(half_xy, half_xy, half_z);
  // Keep the point density of the default benchmark scenes.
  const SceneParams defaults;
  const double density = defaults.num_points / (defaults.box_max - defaults.box_min).prod();
  params.num_points = static_cast<int>(
      std::clamp(density * (params.box_max - params.box_min).prod(), 500.0, 100000.0));

  ServoTask task;
  task.scene = std::make_shared<const Scene>(
      generate_scene(mix_seed(env_seed, 2), SceneVariant::PointCloud, params));
  task.initial_pose = initial;
  task.desired_pose = desired;
  task.difficulty = Difficulty::Hard;
  task.seed = env_seed;
  (void)k;
  return task;
}

SweepResult run_sweep(const SweepConfig& cfg, const std::vector<MethodSpec>& methods,
                      const ControllerConfig& controller, const ServoLimits& limits,
                      const SensorConfig& sensor, unsigned jobs) {
  cfg.validate();
  controller.validate();
  if (methods.empty()) throw InvalidArgument("run_sweep: no methods");

  const int n_batches = cfg.batches();
  const std::size_t per_batch = static_cast<std::size_t>(cfg.environments) * methods.size();
  std::vector<std::uint8_t> converged(static_cast<std::size_t>(n_batches) * per_batch, 0);
  parallel_for(converged.size(), jobs, [&](std::size_t job) {
    const int batch = static_cast<int>(job / per_batch) + 1;
    const std::size_t rest = job % per_batch;
    const int env = static_cast<int>(rest / methods.size());
    const MethodSpec& m = methods[rest % methods.size()];
    const ServoTask task = make_sweep_task(cfg, batch, env, sensor.k);
    converged[job] = run_servo(task, m, controller, limits, sensor).converged ? 1 : 0;
  });

  SweepResult out;
  out.config = cfg;
  for (const auto& m : methods) out.methods.push_back(to_string(m.method));
  for (int b = 1; b <= n_batches; ++b) {
    SweepRow row;
    row.batch = b;
    row.offset = b * cfg.step;
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      int count = 0;
      for (int e = 0; e < cfg.environments; ++e)
        count += converged[static_cast<std::size_t>(b - 1) * per_batch +
                           static_cast<std::size_t>(e) * methods.size() + mi];
      row.converged.push_back(count);
      row.ratio.push_back(static_cast<double>(count) / cfg.environments);
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

std::string sweep_csv(const SweepResult& result) {
  const SweepConfig& c = result.config;
  std::string out = "# flowvs convergence sweep\n";
  out += "# rotation_deg=" + format_number(c.rotation_deg.x()) + " " +
         format_number(c.rotation_deg.y()) + " " + format_number(c.rotation_deg.z()) +
         " about camera axes (R = Rx*Ry*Rz)\n";
  out += "# offset: goal displaced by offset_m along each of -x +y +z of the fixed initial camera "
         "simultaneously\n";
  out += "# step=" + format_number(c.step) + " max=" + format_number(c.max) +
         " environments=" + std::to_string(c.environments) + " seed=" + std::to_string(c.seed) +
         "\n";
  out += "batch,offset_m";
  for (const auto& m : result.methods) out += ",ratio_" + m;
  out += '\n';
  for (const SweepRow& r : result.rows) {
    out += std::to_string(r.batch) + ',' + format_number(r.offset);
    for (double ratio : r.ratio) out += ',' + format_number(ratio);
    out += '\n';
  }
  return out;
}

}  // namespace flowvs

#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <optional>

#include "flowvs/bench.hpp"
#include "flowvs/errors.hpp"
#include "flowvs/flow_io.hpp"
#include "flowvs/observation.hpp"
#include "flowvs/plot.hpp"
#include "flowvs/rng.hpp"
#include "flowvs/scene_io.hpp"
#include "flowvs/servo.hpp"

namespace fs = std::filesystem;

namespace flowvs::cli {

namespace {

const std::vector<std::string> kMethodNames{"flow-true-depth", "flow-depth-proxy",
                                            "flow-external-depth", "photometric", "pbvs-oracle"};
const std::vector<std::string> kDifficultyNames{"easy", "medium", "hard"};
const std::vector<std::string> kSceneNames{"point-cloud", "textured-plane"};

std::string default_out_dir() {
  const char* env = std::getenv("FLOWVS_OUT_DIR");
  return env && *env ? env : "out";
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string read_text(const fs::path& path) {
  const Bytes b = read_file(path);
  return {b.begin(), b.end()};
}

// Task selection shared by `run`, `task` and `export`.
struct TaskSource {
  std::string file;
  std::uint64_t seed = 0;
  std::string difficulty = "easy";
  std::string scene = "point-cloud";

  void add_to(CLI::App& app) {
    app.add_option("--task", file, "Task JSON file")->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "Task seed (when no --task)");
    app.add_option("--difficulty", difficulty, "easy|medium|hard")
        ->check(CLI::IsMember(kDifficultyNames));
    app.add_option("--scene", scene, "point-cloud|textured-plane")
        ->check(CLI::IsMember(kSceneNames));
  }

  ServoTask build(const Intrinsics& k) const {
    if (!file.empty()) return load_task_file(file);
    auto s = std::make_shared<const Scene>(
        generate_scene(mix_seed(seed, 1), scene_variant_from_string(scene)));
    return sample_task(seed, difficulty_from_string(difficulty), std::move(s), k);
  }
};

struct ControllerFlags {
  ControllerConfig cfg;
  int max_iters = ServoLimits{}.max_iters;

  void add_to(CLI::App& app) {
    app.add_option("--lambda", cfg.lambda, "Gain")->capture_default_str();
    app.add_option("--mu", cfg.mu, "Levenberg-Marquardt damping")->capture_default_str();
    app.add_option("--max-iters", max_iters, "Iteration cap")->capture_default_str();
  }

  ServoLimits limits() const {
    ServoLimits l;
    l.max_iters = max_iters;
    return l;
  }
};

std::vector<MethodSpec> method_specs(const std::vector<std::string>& names) {
  std::vector<MethodSpec> out;
  for (const auto& n : names) out.push_back({method_from_string(n), {}, {}});
  return out;
}

std::string summary_line(const ServoResult& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "converged=%d t_err=%.6f r_err=%.6f traj_len=%.6f iterations=%d reason=%s",
                r.converged ? 1 : 0, r.final_t_err, r.final_r_err, r.traj_len, r.iterations,
                to_string(r.reason).c_str());
  return buf;
}

int cmd_run(const TaskSource& src, const std::string& method, const ControllerFlags& ctl,
            const std::string& flow_dir, const std::string& depth_dir, const fs::path& out_dir,
            std::ostream& out) {
  const SensorConfig sensor;
  const ServoTask task = src.build(sensor.k);
  const MethodSpec spec{method_from_string(method), flow_dir, depth_dir};
  const ServoResult r = run_servo(task, spec, ctl.cfg, ctl.limits(), sensor);
  const std::string csv = write_trajectory_csv(r);
  write_text(out_dir / "trajectory.csv", csv);
  write_text(out_dir / "trajectory.svg", render_plots(csv));
  out << summary_line(r) << '\n';
  return r.converged ? kExitConverged : kExitNotConverged;
}

int cmd_bench(const std::string& suite, int n, const std::vector<std::string>& methods,
              std::uint64_t seed, const std::optional<std::string>& scene, unsigned jobs,
              const ControllerFlags& ctl, const fs::path& out_dir, std::ostream& out) {
  BenchConfig cfg;
  if (suite == "all") {
    cfg.suites = {Difficulty::Easy, Difficulty::Medium, Difficulty::Hard};
    cfg.full_benchmark = true;
  } else {
    cfg.suites = {difficulty_from_string(suite)};
  }
  cfg.n = n;
  cfg.methods = method_specs(methods);
  cfg.seed = seed;
  // The photometric baseline needs a textured surface.
  const bool photometric = std::find(methods.begin(), methods.end(), "photometric") != methods.end();
  cfg.variant = scene ? scene_variant_from_string(*scene)
                      : (photometric ? SceneVariant::TexturedPlane : SceneVariant::PointCloud);
  cfg.controller = ctl.cfg;
  cfg.limits = ctl.limits();
  cfg.jobs = jobs;

  const BenchReport report = run_bench(cfg);
  const std::string csv = bench_report_csv(report);
  write_text(out_dir / "bench_report.csv", csv);
  write_text(out_dir / "bench_summary.csv", bench_summary_csv(report));
  write_text(out_dir / "bench_report.svg", render_plots(csv));
  out << bench_summary_table(report);
  return kExitConverged;
}

int cmd_sweep(SweepConfig cfg, int preset, const std::vector<double>& rotation,
              const std::vector<std::string>& methods, unsigned jobs, const ControllerFlags& ctl,
              const fs::path& out_dir, std::ostream& out) {
  if (!rotation.empty()) {
    cfg.rotation_deg = Vec3(rotation[0], rotation[1], rotation[2]);
  } else {
    cfg.rotation_deg = kSweepPresets.at(static_cast<std::size_t>(preset - 1));
  }
  const SweepResult r =
      run_sweep(cfg, method_specs(methods), ctl.cfg, ctl.limits(), SensorConfig{}, jobs);
  const std::string csv = sweep_csv(r);
  write_text(out_dir / "sweep.csv", csv);
  write_text(out_dir / "sweep.svg", render_plots(csv));
  char line[128];
  out << "offset_m";
  for (const auto& m : r.methods) out << "  " << m;
  out << '\n';
  for (const SweepRow& row : r.rows) {
    std::snprintf(line, sizeof line, "%8.2f", row.offset);
    out << line;
    for (std::size_t i = 0; i < row.ratio.size(); ++i) {
      std::snprintf(line, sizeof line, "  %d/%d", row.converged[i], cfg.environments);
      out << line;
    }
    out << '\n';
  }
  return kExitConverged;
}

// Writes image-resolution oracle provider files along the trajectory of a
// reference run, so the external-input code path can be replayed offline.
int cmd_export(const TaskSource& src, const std::string& method, const ControllerFlags& ctl,
               const fs::path& dir, std::ostream& out) {
  const SensorConfig sensor;
  const ServoTask task = src.build(sensor.k);
  const ServoResult r =
      run_servo(task, {method_from_string(method), {}, {}}, ctl.cfg, ctl.limits(), sensor);
  fs::create_directories(dir);
  for (std::size_t i = 0; i < r.log.size(); ++i) {
    const int iter = static_cast<int>(i);
    const SceneView view(*task.scene, r.log[i].pose, sensor.k);
    write_file(flow_cur_to_desired_path(dir, iter), write_flo(oracle_flow_dense(view, task.desired_pose)));
    if (i > 0)
      write_file(flow_prev_to_cur_path(dir, iter), write_flo(oracle_flow_dense(view, r.log[i - 1].pose)));
    write_file(depth_path(dir, iter), write_pfm(true_depth_dense(view)));
  }
  out << "wrote " << r.log.size() << " iterations to " << dir.string() << '\n';
  return kExitConverged;
}

}  // namespace

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Flow-based visual servoing simulator and benchmark"};
  app.name("flowvs");
  app.require_subcommand(1);

  std::string out_dir = default_out_dir();
  ControllerFlags ctl;

  auto* run = app.add_subcommand("run", "Run one servo task");
  TaskSource run_src;
  std::string run_method = "flow-true-depth";
  std::string flow_dir, depth_dir;
  run_src.add_to(*run);
  run->add_option("--method", run_method, "Controller")->check(CLI::IsMember(kMethodNames));
  ctl.add_to(*run);
  run->add_option("--flow-dir", flow_dir, "Read flow from <iter>_flow_*.flo files");
  run->add_option("--depth-dir", depth_dir, "Read depth from <iter>_depth.pfm files");
  run->add_option("--out", out_dir, "Output directory");

  auto* bench = app.add_subcommand("bench", "Run methods over seeded task suites");
  std::string suite = "easy";
  int n = -1;
  std::vector<std::string> bench_methods{"flow-true-depth"};
  std::uint64_t bench_seed = 0;
  std::optional<std::string> bench_scene;
  unsigned jobs = 0;
  bench->add_option("--suite", suite, "easy|medium|hard|all")
      ->check(CLI::IsMember({"easy", "medium", "hard", "all"}));
  bench->add_option("--n", n, "Tasks per suite (default 10; 3/4/3 for all)")
      ->check(CLI::NonNegativeNumber);
  bench->add_option("--methods", bench_methods, "Comma-separated methods")
      ->delimiter(',')
      ->check(CLI::IsMember(kMethodNames));
  bench->add_option("--seed", bench_seed, "Master seed");
  bench->add_option("--scene", bench_scene, "point-cloud|textured-plane")
      ->check(CLI::IsMember(kSceneNames));
  bench->add_option("--jobs", jobs, "Worker threads (0 = all cores)");
  ctl.add_to(*bench);
  bench->add_option("--out", out_dir, "Output directory");

  auto* sweep = app.add_subcommand("sweep", "Convergence-ratio sweep over goal offsets");
  SweepConfig sweep_cfg;
  int preset = 2;
  std::vector<double> rotation;
  std::vector<std::string> sweep_methods{"flow-depth-proxy"};
  sweep->add_option("--preset", preset, "Rotation preset: 1=(10,10,25) 2=(20,20,40) 3=(30,30,50)")
      ->check(CLI::Range(1, 3));
  sweep->add_option("--rotation", rotation, "Rotation set-point in degrees (x y z)")
      ->expected(3)
      ->excludes("--preset");
  sweep->add_option("--step", sweep_cfg.step, "Offset step (m)")->capture_default_str();
  sweep->add_option("--max", sweep_cfg.max, "Largest offset (m)")->capture_default_str();
  sweep->add_option("--envs", sweep_cfg.environments, "Scenes per batch")->capture_default_str();
  sweep->add_option("--seed", sweep_cfg.seed, "Master seed");
  sweep->add_option("--methods", sweep_methods, "Comma-separated methods")
      ->delimiter(',')
      ->check(CLI::IsMember(kMethodNames));
  sweep->add_option("--jobs", jobs, "Worker threads (0 = all cores)");
  ctl.add_to(*sweep);
  sweep->add_option("--out", out_dir, "Output directory");

  auto* plot = app.add_subcommand("plot", "Render a CSV produced by this tool as SVG");
  std::string plot_in, plot_out;
  plot->add_option("csv", plot_in, "Input CSV")->required()->check(CLI::ExistingFile);
  plot->add_option("-o,--out", plot_out, "Output SVG (default: input with .svg)");

  auto* task_cmd = app.add_subcommand("task", "Write a seeded task as JSON");
  TaskSource task_src;
  std::string task_out;
  task_src.add_to(*task_cmd);
  task_cmd->add_option("-o,--out", task_out, "Output file")->required();

  auto* exp = app.add_subcommand("export", "Write oracle flow/depth provider files for a task");
  TaskSource exp_src;
  std::string exp_method = "flow-true-depth";
  exp_src.add_to(*exp);
  exp->add_option("--method", exp_method, "Reference controller")
      ->check(CLI::IsMember(kMethodNames));
  ctl.add_to(*exp);
  exp->add_option("--out", out_dir, "Output directory");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*run) return cmd_run(run_src, run_method, ctl, flow_dir, depth_dir, out_dir, out);
    if (*bench) return cmd_bench(suite, n, bench_methods, bench_seed, bench_scene, jobs, ctl, out_dir, out);
    if (*sweep) return cmd_sweep(sweep_cfg, preset, rotation, sweep_methods, jobs, ctl, out_dir, out);
    if (*plot) {
      const fs::path dst = plot_out.empty() ? fs::path(plot_in).replace_extension(".svg") : fs::path(plot_out);
      write_text(dst, render_plots(read_text(plot_in)));
      return kExitConverged;
    }
    if (*task_cmd) {
      const ServoTask t = task_src.build(SensorConfig{}.k);
      if (fs::path(task_out).has_parent_path()) fs::create_directories(fs::path(task_out).parent_path());
      save_task_file(task_out, t);
      return kExitConverged;
    }
    if (*exp) return cmd_export(exp_src, exp_method, ctl, out_dir, out);
  } catch (const std::exception& e) {
    err << "flowvs: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace flowvs::cli

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "flowvs/control.hpp"
#include "flowvs/geometry.hpp"
#include "flowvs/scene.hpp"

namespace flowvs {

enum class Method { FlowTrueDepth, FlowDepthProxy, FlowExternalDepth, Photometric, PbvsOracle };

std::string to_string(Method m);
/// Accepts the CLI spellings ("flow-true-depth", ...). Throws InvalidArgument.
Method method_from_string(const std::string& s);

/// Which controller runs, and where externally computed inputs come from.
/// When `flow_dir` is set, flow methods read
///   <flow_dir>/<iter>_flow_cur_to_desired.flo   (feature error)
///   <flow_dir>/<iter>_flow_prev_to_cur.flo      (depth proxy, iter >= 1)
/// instead of the geometric oracle. FlowExternalDepth reads
///   <depth_dir>/<iter>_depth.pfm
struct MethodSpec {
  Method method = Method::FlowTrueDepth;
  std::filesystem::path flow_dir;
  std::filesystem::path depth_dir;
};

std::filesystem::path flow_cur_to_desired_path(const std::filesystem::path& dir, int iter);
std::filesystem::path flow_prev_to_cur_path(const std::filesystem::path& dir, int iter);
std::filesystem::path depth_path(const std::filesystem::path& dir, int iter);

struct ConvergenceThresholds {
  double t = 0.04;  // meters
  double r = 1.0;   // degrees
};

/// Strict: t_err < t and r_err < r.
bool check_convergence(double t_err, double r_err, const ConvergenceThresholds& th = {});

struct ServoLimits {
  int max_iters = 5000;
  ConvergenceThresholds thresholds;
  /// Stop as diverged once t_err exceeds this multiple of the initial error
  /// (floored at the convergence threshold).
  double divergence_factor = 3.0;
};

/// Camera model and feature-grid resolution used by the loop.
struct SensorConfig {
  Intrinsics k = Intrinsics::Default();
  int grid_cols = 32;
  int grid_rows = 32;
};

enum class StopReason { Converged, MaxIterations, Diverged, IllConditioned, Degenerate };
std::string to_string(StopReason r);

struct ServoLogEntry {
  Pose pose;
  Twist twist;                       // applied at this pose (zero on the final entry)
  double feature_error = 0.0;        // RMS of s - s* (normalized coords), or of I - I*
  double photometric_error = 0.0;    // mean |I - I*| over the grid; NaN for point clouds
  double median_depth_error = 0.0;   // relative, vs true depth; NaN when not applicable
  double t_err = 0.0;
  double r_err = 0.0;
};

struct ServoResult {
  bool converged = false;
  int iterations = 0;  // number of twists applied
  double init_t_err = 0.0;
  double init_r_err = 0.0;
  double final_t_err = 0.0;
  double final_r_err = 0.0;
  double traj_len = 0.0;
  StopReason reason = StopReason::MaxIterations;
  std::string detail;
  std::vector<ServoLogEntry> log;  // iterations + 1 entries
};

/// Sum of consecutive position distances over the log.
double trajectory_length(const std::vector<ServoLogEntry>& log);

/// Closed-loop kinematic simulation. Throws IoError when a provider file for
/// an external method is missing; degenerate or ill-conditioned observations
/// end the run as not converged.
ServoResult run_servo(const ServoTask& task, const MethodSpec& method, const ControllerConfig& cfg,
                      const ServoLimits& limits = {}, const SensorConfig& sensor = {});

/// Header + one row per log entry: iter, position, unit quaternion (w, x, y,
/// z), twist v1..v6, feat_err, photo_err, t_err, r_err.
std::string write_trajectory_csv(const ServoResult& result);

}  // namespace flowvs

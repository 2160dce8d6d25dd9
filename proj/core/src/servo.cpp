#include "flowvs/servo.hpp"

#include <cmath>
#include <numbers>
#include <optional>

#include "flowvs/csv.hpp"
#include "flowvs/errors.hpp"
#include "flowvs/flow_io.hpp"
#include "flowvs/observation.hpp"

namespace flowvs {

std::string to_string(Method m) {
  switch (m) {
    case Method::FlowTrueDepth: return "flow-true-depth";
    case Method::FlowDepthProxy: return "flow-depth-proxy";
    case Method::FlowExternalDepth: return "flow-external-depth";
    case Method::Photometric: return "photometric";
    case Method::PbvsOracle: return "pbvs-oracle";
  }
  return "flow-true-depth";
}

Method method_from_string(const std::string& s) {
  for (Method m : {Method::FlowTrueDepth, Method::FlowDepthProxy, Method::FlowExternalDepth,
                   Method::Photometric, Method::PbvsOracle})
    if (to_string(m) == s) return m;
  throw InvalidArgument("unknown method '" + s + "'");
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::Converged: return "converged";
    case StopReason::MaxIterations: return "max-iterations";
    case StopReason::Diverged: return "diverged";
    case StopReason::IllConditioned: return "ill-conditioned";
    case StopReason::Degenerate: return "degenerate";
  }
  return "max-iterations";
}

std::filesystem::path flow_cur_to_desired_path(const std::filesystem::path& dir, int iter) {
  return dir / (std::to_string(iter) + "_flow_cur_to_desired.flo");
}
std::filesystem::path flow_prev_to_cur_path(const std::filesystem::path& dir, int iter) {
  return dir / (std::to_string(iter) + "_flow_prev_to_cur.flo");
}
std::filesystem::path depth_path(const std::filesystem::path& dir, int iter) {
  return dir / (std::to_string(iter) + "_depth.pfm");
}

bool check_convergence(double t_err, double r_err, const ConvergenceThresholds& th) {
  return t_err < th.t && r_err < th.r;
}

double trajectory_length(const std::vector<ServoLogEntry>& log) {
  double len = 0.0;
  for (std::size_t i = 1; i < log.size(); ++i)
    len += (log[i].pose.translation - log[i - 1].pose.translation).norm();
  return len;
}

namespace {

template <class Reader>
auto load_provider(const std::filesystem::path& path, int iter, Reader reader) {
  Bytes bytes;
  try {
    bytes = read_file(path);
  } catch (const IoError& e) {
    throw IoError("iteration " + std::to_string(iter) + ": " + e.what(), iter);
  }
  try {
    return reader(bytes);
  } catch (const FormatError& e) {
    throw IoError("iteration " + std::to_string(iter) + ": '" + path.string() + "': " + e.what(),
                  iter);
  }
}

double rms(const Eigen::VectorXd& e, Eigen::Index per_node) {
  const Eigen::Index nodes = e.size() / per_node;
  return nodes > 0 ? e.norm() / std::sqrt(static_cast<double>(nodes)) : 0.0;
}

struct Observation {
  Twist twist;
  double feature_error = 0.0;
  double median_depth_error = std::nan("");
};

// Owns per-run caches (desired-view renderings) and computes one control step.
class Stepper {
 public:
  Stepper(const ServoTask& task, const MethodSpec& method, const ControllerConfig& cfg,
          const SensorConfig& sensor)
      : task_(task), method_(method), cfg_(cfg), k_(sensor.k),
        grid_(sensor.grid_cols, sensor.grid_rows, sensor.k) {
    const Scene& scene = *task.scene;
    if (scene.is_plane()) desired_samples_ = render_grid_samples(scene, task.desired_pose, grid_, k_);
    if (method.method == Method::Photometric) {
      if (!scene.is_plane())
        throw UnsupportedScene("photometric method requires a textured-plane scene");
      desired_image_ = render_image(scene, task.desired_pose, k_);
      // The photometric law reads node pixels and their 4-neighbours only.
      stencil_.assign(static_cast<std::size_t>(k_.width) * k_.height, 0);
      for (std::size_t i = 0; i < grid_.size(); ++i) {
        const Eigen::Vector2i p = nearest_pixel(grid_, i);
        for (const auto& d : {Eigen::Vector2i(0, 0), Eigen::Vector2i(1, 0), Eigen::Vector2i(-1, 0),
                              Eigen::Vector2i(0, 1), Eigen::Vector2i(0, -1)}) {
          const Eigen::Vector2i q = p + d;
          if (q.x() >= 0 && q.y() >= 0 && q.x() < k_.width && q.y() < k_.height)
            stencil_[static_cast<std::size_t>(q.y()) * k_.width + static_cast<std::size_t>(q.x())] = 1;
        }
      }
    }
    if (method.method == Method::FlowExternalDepth && method.depth_dir.empty())
      throw IoError("flow-external-depth requires a depth provider directory");
  }

  double photometric_error(const Pose& pose) const {
    if (!task_.scene->is_plane()) return std::nan("");
    const auto cur = render_grid_samples(*task_.scene, pose, grid_, k_);
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      if (std::isnan(cur[i]) || std::isnan(desired_samples_[i])) continue;
      sum += std::abs(cur[i] - desired_samples_[i]);
      ++n;
    }
    return n ? sum / static_cast<double>(n) : std::nan("");
  }

  // Throws DegenerateObservation / IllConditioned.
  Observation observe(int iter, const Pose& pose, const std::optional<Pose>& prev_pose,
                      const Twist& prev_twist) const {
    const Scene& scene = *task_.scene;
    Observation out;
    switch (method_.method) {
      case Method::PbvsOracle: {
        out.twist = clamp_twist(pbvs_oracle_velocity(pose, task_.desired_pose, cfg_.lambda), cfg_);
        const PoseError e = pose_error(pose, task_.desired_pose);
        out.feature_error = std::hypot(e.t_err, e.r_err * std::numbers::pi / 180.0);
        return out;
      }
      case Method::Photometric: {
        const SceneView view(scene, pose, k_);
        const DepthMap depth = true_depth(view, grid_);
        const RenderedImage cur = render_image(scene, pose, k_, stencil_);
        const auto obs = photometric_observation(cur.image, desired_image_.image, depth, grid_, k_,
                                                 cur.miss, desired_image_.miss);
        out.feature_error = rms(obs.error, 1);
        out.median_depth_error = 0.0;
        out.twist = lm_velocity(obs.L, obs.error, cfg_);
        return out;
      }
      default: break;
    }

    const SceneView view(scene, pose, k_);
    const FlowField flow =
        method_.flow_dir.empty()
            ? oracle_flow(view, task_.desired_pose, grid_)
            : sample_to_grid(load_provider(flow_cur_to_desired_path(method_.flow_dir, iter), iter,
                                           [](const Bytes& b) { return read_flo(b); }),
                             grid_);
    const DepthMap truth = true_depth(view, grid_);

    DepthMap depth;
    switch (method_.method) {
      case Method::FlowTrueDepth:
        depth = truth;
        break;
      case Method::FlowDepthProxy: {
        if (!prev_pose) {
          depth = flow_depth(FlowField(grid_.cols, grid_.rows), kAlphaUnknown);
          break;
        }
        // Correspondences between the current and previous frames, anchored
        // at the current grid nodes; only their magnitude is used.
        const FlowField motion =
            method_.flow_dir.empty()
                ? oracle_flow(view, *prev_pose, grid_)
                : sample_to_grid(load_provider(flow_prev_to_cur_path(method_.flow_dir, iter), iter,
                                               [](const Bytes& b) { return read_flo(b); }),
                                 grid_);
        depth = flow_depth(motion, calibrate_alpha(prev_twist, cfg_.dt, k_));
        break;
      }
      case Method::FlowExternalDepth:
        depth = sample_to_grid(load_provider(depth_path(method_.depth_dir, iter), iter,
                                             [](const Bytes& b) { return read_pfm(b); }),
                               grid_);
        break;
      default: break;
    }

    std::vector<std::uint8_t> mask(grid_.size(), 0);
    for (std::size_t i = 0; i < grid_.size(); ++i) mask[i] = flow.valid[i] && depth.valid[i];
    const InteractionMatrix L = stack_interaction(grid_, depth, k_, mask);
    const Eigen::VectorXd e = flow_to_error(flow, k_, mask);
    out.feature_error = rms(e, 2);
    out.median_depth_error = method_.method == Method::FlowTrueDepth
                                 ? 0.0
                                 : median_relative_depth_error(depth, truth);
    out.twist = lm_velocity(L, e, cfg_);
    return out;
  }

 private:
  const ServoTask& task_;
  const MethodSpec& method_;
  const ControllerConfig& cfg_;
  Intrinsics k_;
  FeatureGrid grid_;
  std::vector<double> desired_samples_;
  RenderedImage desired_image_;
  std::vector<std::uint8_t> stencil_;
};

}  // namespace

ServoResult run_servo(const ServoTask& task, const MethodSpec& method, const ControllerConfig& cfg,
                      const ServoLimits& limits, const SensorConfig& sensor) {
  if (!task.scene) throw InvalidArgument("run_servo: task has no scene");
  if (!task.initial_pose.isValid() || !task.desired_pose.isValid())
    throw InvalidArgument("run_servo: invalid task pose");
  if (limits.max_iters < 1) throw InvalidArgument("run_servo: max_iters must be >= 1");
  cfg.validate();

  const Stepper stepper(task, method, cfg, sensor);
  ServoResult result;
  const PoseError init = pose_error(task.initial_pose, task.desired_pose);
  result.init_t_err = init.t_err;
  result.init_r_err = init.r_err;
  const double diverge_at =
      limits.divergence_factor * std::max(init.t_err, limits.thresholds.t);

  const bool external =
      !method.flow_dir.empty() || method.method == Method::FlowExternalDepth;
  Pose pose = task.initial_pose;
  std::optional<Pose> prev_pose;
  Twist prev_twist;
  for (int iter = 0;; ++iter) {
    ServoLogEntry entry;
    entry.pose = pose;
    const PoseError err = pose_error(pose, task.desired_pose);
    entry.t_err = err.t_err;
    entry.r_err = err.r_err;
    entry.photometric_error = stepper.photometric_error(pose);

    const bool at_goal = check_convergence(err.t_err, err.r_err, limits.thresholds);
    std::optional<StopReason> stop;
    // External providers are not expected to supply files for the final pose.
    if (!(at_goal && external)) {
      try {
        const Observation obs = stepper.observe(iter, pose, prev_pose, prev_twist);
        entry.twist = obs.twist;
        entry.feature_error = obs.feature_error;
        entry.median_depth_error = obs.median_depth_error;
      } catch (const DegenerateObservation& e) {
        stop = StopReason::Degenerate;
        result.detail = e.what();
      } catch (const IllConditioned& e) {
        stop = StopReason::IllConditioned;
        result.detail = e.what();
      }
    } else {
      entry.feature_error = std::nan("");
      entry.median_depth_error = std::nan("");
    }

    if (at_goal) {
      stop = StopReason::Converged;
      result.detail.clear();
    } else if (!stop && err.t_err > diverge_at) {
      stop = StopReason::Diverged;
    } else if (!stop && iter >= limits.max_iters) {
      stop = StopReason::MaxIterations;
    }
    if (stop) {
      entry.twist = Twist();
      result.log.push_back(entry);
      result.reason = *stop;
      break;
    }

    result.log.push_back(entry);
    prev_pose = pose;
    prev_twist = entry.twist;
    pose = pose * exp_twist(entry.twist, cfg.dt);
    ++result.iterations;
  }

  const ServoLogEntry& last = result.log.back();
  result.final_t_err = last.t_err;
  result.final_r_err = last.r_err;
  result.converged = result.reason == StopReason::Converged;
  result.traj_len = trajectory_length(result.log);
  return result;
}

std::string write_trajectory_csv(const ServoResult& result) {
  std::string out =
      "iter,px,py,pz,qw,qx,qy,qz,v1,v2,v3,v4,v5,v6,feat_err,photo_err,t_err,r_err\n";
  for (std::size_t i = 0; i < result.log.size(); ++i) {
    const ServoLogEntry& e = result.log[i];
    Eigen::Quaterniond q(e.pose.rotation);
    q.normalize();
    if (q.w() < 0) q.coeffs() = -q.coeffs();
    const Vec6 v = e.twist.vector();
    const double fields[] = {e.pose.translation.x(), e.pose.translation.y(), e.pose.translation.z(),
                             q.w(), q.x(), q.y(), q.z(), v(0), v(1), v(2), v(3), v(4), v(5),
                             e.feature_error, e.photometric_error, e.t_err, e.r_err};
    out += std::to_string(i);
    for (double f : fields) {
      out += ',';
      out += format_number(f);
    }
    out += '\n';
  }
  return out;
}

}  // namespace flowvs

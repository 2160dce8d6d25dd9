#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "flowvs/feature_grid.hpp"
#include "flowvs/geometry.hpp"
#include "flowvs/observation.hpp"

namespace flowvs {

/// Gains and limits for the velocity law. `lambda` and `mu` are the step-size
/// and damping parameters of the Levenberg-Marquardt update; `dt` is the
/// integration step. Velocity clamps scale the whole twist uniformly.
/// lambda = 0.9 was tuned on the easy suite: smaller gains converge just as
/// reliably but stop closer to the 4 cm threshold.
struct ControllerConfig {
  double lambda = 0.9;
  double mu = 1e-3;
  double dt = 1.0;
  double max_linear = 0.5;   // m/s
  double max_angular = 0.3;  // rad/s

  /// Throws InvalidArgument.
  void validate() const;
};

/// Damped normal matrices above this condition number are rejected.
inline constexpr double kMaxCondition = 1e12;

using PointJacobian = Eigen::Matrix<double, 2, 6>;

/// Classical point-feature interaction matrix in normalized coordinates.
/// Throws InvalidArgument for z <= 0.
PointJacobian point_interaction(double x, double y, double z);

struct InteractionMatrix {
  Eigen::MatrixXd rows;           // 2N x 6
  std::vector<std::size_t> nodes;  // grid index of each row pair
};

/// Stacks one 2x6 block per node that has valid depth (and, if `mask` is
/// non-empty, a non-zero mask entry). Throws DegenerateObservation with fewer
/// than 3 nodes.
InteractionMatrix stack_interaction(const FeatureGrid& grid, const DepthMap& depth,
                                    const Intrinsics& k,
                                    std::span<const std::uint8_t> mask = {});

/// Feature error s - s* in normalized coordinates: (-du/fx, -dv/fy) per valid
/// (and unmasked) node.
Eigen::VectorXd flow_to_error(const FlowField& flow, const Intrinsics& k,
                              std::span<const std::uint8_t> mask = {});

/// v = -lambda (L^T L + mu diag(L^T L))^-1 L^T e, then uniformly clamped.
/// Throws IllConditioned when the damped matrix is singular or its condition
/// number exceeds kMaxCondition.
Twist lm_velocity(const Eigen::MatrixXd& L, const Eigen::VectorXd& error,
                  const ControllerConfig& cfg);
inline Twist lm_velocity(const InteractionMatrix& L, const Eigen::VectorXd& error,
                         const ControllerConfig& cfg) {
  return lm_velocity(L.rows, error, cfg);
}

/// Scales the twist so neither norm exceeds its clamp.
Twist clamp_twist(const Twist& xi, const ControllerConfig& cfg);

/// Photometric baseline evaluated at the pixels nearest to the grid nodes.
/// `miss`/`miss_star` flag pixels without scene intensity (may be empty).
struct PhotometricObservation {
  Eigen::MatrixXd L;      // N x 6
  Eigen::VectorXd error;  // I - I*
};

PhotometricObservation photometric_observation(const Image& I, const Image& I_star,
                                               const DepthMap& depth, const FeatureGrid& grid,
                                               const Intrinsics& k,
                                               std::span<const std::uint8_t> miss = {},
                                               std::span<const std::uint8_t> miss_star = {});

Twist photometric_controller(const Image& I, const Image& I_star, const DepthMap& depth,
                             const FeatureGrid& grid, const Intrinsics& k,
                             const ControllerConfig& cfg,
                             std::span<const std::uint8_t> miss = {},
                             std::span<const std::uint8_t> miss_star = {});

/// Ground-truth PBVS: -lambda * log(desired^-1 * current), a current-frame twist.
Twist pbvs_oracle_velocity(const Pose& current, const Pose& desired, double lambda);

}  // namespace flowvs

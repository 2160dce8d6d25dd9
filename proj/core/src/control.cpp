#include "flowvs/control.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "flowvs/errors.hpp"

namespace flowvs {

void ControllerConfig::validate() const {
  if (!(lambda > 0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be > 0");
  if (!(mu >= 0) || !std::isfinite(mu)) throw InvalidArgument("mu must be >= 0");
  if (!(dt > 0) || !std::isfinite(dt)) throw InvalidArgument("dt must be > 0");
  if (!(max_linear > 0) || !(max_angular > 0)) throw InvalidArgument("velocity clamps must be > 0");
}

PointJacobian point_interaction(double x, double y, double z) {
  if (!(z > 0)) throw InvalidArgument("point_interaction: depth must be > 0");
  const double iz = 1.0 / z;
  PointJacobian L;
  L << -iz, 0, x * iz, x * y, -(1 + x * x), y,  //
      0, -iz, y * iz, 1 + y * y, -x * y, -x;
  return L;
}

namespace {

bool selected(std::span<const std::uint8_t> mask, std::size_t i) {
  return mask.empty() || mask[i] != 0;
}

}  // namespace

InteractionMatrix stack_interaction(const FeatureGrid& grid, const DepthMap& depth,
                                    const Intrinsics& k, std::span<const std::uint8_t> mask) {
  if (depth.size() != grid.size())
    throw InvalidArgument("stack_interaction: depth map and grid sizes differ");
  if (!mask.empty() && mask.size() != grid.size())
    throw InvalidArgument("stack_interaction: mask and grid sizes differ");

  InteractionMatrix out;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (depth.valid[i] && selected(mask, i)) out.nodes.push_back(i);
  if (out.nodes.size() < 3)
    throw DegenerateObservation("stack_interaction: fewer than 3 valid nodes (" +
                                std::to_string(out.nodes.size()) + ")");

  out.rows.resize(static_cast<Eigen::Index>(2 * out.nodes.size()), 6);
  for (std::size_t r = 0; r < out.nodes.size(); ++r) {
    const std::size_t i = out.nodes[r];
    const Vec2 xy = k.normalize(grid.node(i));
    out.rows.block<2, 6>(static_cast<Eigen::Index>(2 * r), 0) =
        point_interaction(xy.x(), xy.y(), depth.depth[i]);
  }
  return out;
}

Eigen::VectorXd flow_to_error(const FlowField& flow, const Intrinsics& k,
                              std::span<const std::uint8_t> mask) {
  if (!mask.empty() && mask.size() != flow.size())
    throw InvalidArgument("flow_to_error: mask and flow sizes differ");
  std::vector<double> e;
  e.reserve(2 * flow.size());
  for (std::size_t i = 0; i < flow.size(); ++i) {
    if (!flow.valid[i] || !selected(mask, i)) continue;
    e.push_back(-flow.displacement[i].x() / k.fx);
    e.push_back(-flow.displacement[i].y() / k.fy);
  }
  return Eigen::Map<Eigen::VectorXd>(e.data(), static_cast<Eigen::Index>(e.size()));
}

Twist clamp_twist(const Twist& xi, const ControllerConfig& cfg) {
  const double nv = xi.linear.norm();
  const double nw = xi.angular.norm();
  double s = 1.0;
  if (nv > cfg.max_linear) s = std::min(s, cfg.max_linear / nv);
  if (nw > cfg.max_angular) s = std::min(s, cfg.max_angular / nw);
  if (s == 1.0) return xi;
  Twist out(s * xi.linear, s * xi.angular);
  // Rounding can leave the scaled norm an ulp above the clamp.
  while (out.linear.norm() > cfg.max_linear || out.angular.norm() > cfg.max_angular) {
    s = std::nextafter(s, 0.0);
    out = Twist(s * xi.linear, s * xi.angular);
  }
  return out;
}

Twist lm_velocity(const Eigen::MatrixXd& L, const Eigen::VectorXd& error,
                  const ControllerConfig& cfg) {
  cfg.validate();
  if (L.cols() != 6) throw InvalidArgument("lm_velocity: L must have 6 columns");
  if (L.rows() != error.size())
    throw InvalidArgument("lm_velocity: error length does not match L rows");
  if (!L.allFinite() || !error.allFinite()) throw InvalidArgument("lm_velocity: non-finite input");

  using Mat6 = Eigen::Matrix<double, 6, 6>;
  const Mat6 H = L.transpose() * L;
  Mat6 A = H;
  A.diagonal() += cfg.mu * H.diagonal();

  const Eigen::SelfAdjointEigenSolver<Mat6> eig(A, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0) || hi / lo > kMaxCondition)
    throw IllConditioned("lm_velocity: damped normal matrix is ill-conditioned",
                         lo > 0 ? hi / lo : std::numeric_limits<double>::infinity());

  if (error.isZero(0.0)) return {};
  // Same minimizer as A^-1 L^T e, solved as the stacked least-squares problem
  // [L; sqrt(mu D)] v = [e; 0] so the conditioning is not squared.
  Eigen::MatrixXd M(L.rows() + 6, 6);
  M.topRows(L.rows()) = L;
  M.bottomRows(6) = (cfg.mu * H.diagonal()).cwiseSqrt().asDiagonal();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(L.rows() + 6);
  rhs.head(L.rows()) = error;
  const Vec6 v = -cfg.lambda * M.householderQr().solve(rhs);
  return clamp_twist(Twist::FromVector(v), cfg);
}

PhotometricObservation photometric_observation(const Image& I, const Image& I_star,
                                               const DepthMap& depth, const FeatureGrid& grid,
                                               const Intrinsics& k,
                                               std::span<const std::uint8_t> miss,
                                               std::span<const std::uint8_t> miss_star) {
  if (I.width != I_star.width || I.height != I_star.height)
    throw InvalidArgument("photometric: image sizes differ");
  if (I.width != grid.image_width || I.height != grid.image_height)
    throw InvalidArgument("photometric: image does not match the grid's image size");
  if (depth.size() != grid.size()) throw InvalidArgument("photometric: depth/grid size mismatch");

  auto missing = [&](std::span<const std::uint8_t> m, int x, int y) {
    return !m.empty() && m[static_cast<std::size_t>(y) * I.width + static_cast<std::size_t>(x)];
  };

  std::vector<std::size_t> used;
  std::vector<Eigen::Matrix<double, 1, 6>> rows;
  std::vector<double> err;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!depth.valid[i]) continue;
    const Eigen::Vector2i p = nearest_pixel(grid, i);
    const int x = p.x();
    const int y = p.y();
    if (x < 1 || y < 1 || x > I.width - 2 || y > I.height - 2) continue;
    if (missing(miss, x, y) || missing(miss_star, x, y) || missing(miss, x - 1, y) ||
        missing(miss, x + 1, y) || missing(miss, x, y - 1) || missing(miss, x, y + 1))
      continue;
    // Central differences, converted from pixels to normalized coordinates.
    const double gx = 0.5 * (I.at(x + 1, y) - I.at(x - 1, y)) * k.fx;
    const double gy = 0.5 * (I.at(x, y + 1) - I.at(x, y - 1)) * k.fy;
    const Vec2 xy = k.normalize(Vec2(x, y));
    const PointJacobian Lx = point_interaction(xy.x(), xy.y(), depth.depth[i]);
    rows.push_back(-(gx * Lx.row(0) + gy * Lx.row(1)));
    err.push_back(I.at(x, y) - I_star.at(x, y));
  }
  if (rows.size() < 6)
    throw DegenerateObservation("photometric: fewer than 6 usable pixels");

  PhotometricObservation out;
  out.L.resize(static_cast<Eigen::Index>(rows.size()), 6);
  out.error.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.L.row(static_cast<Eigen::Index>(r)) = rows[r];
    out.error(static_cast<Eigen::Index>(r)) = err[r];
  }
  if (out.L.isZero(0.0))
    throw DegenerateObservation("photometric: zero image gradient (textureless view)");
  return out;
}

Twist photometric_controller(const Image& I, const Image& I_star, const DepthMap& depth,
                             const FeatureGrid& grid, const Intrinsics& k,
                             const ControllerConfig& cfg, std::span<const std::uint8_t> miss,
                             std::span<const std::uint8_t> miss_star) {
  const auto obs = photometric_observation(I, I_star, depth, grid, k, miss, miss_star);
  return lm_velocity(obs.L, obs.error, cfg);
}

Twist pbvs_oracle_velocity(const Pose& current, const Pose& desired, double lambda) {
  if (current == desired) return {};
  const Twist xi = log_pose(relative(current, desired));
  return {-lambda * xi.linear, -lambda * xi.angular};
}

}  // namespace flowvs

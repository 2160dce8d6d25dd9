#include "flowvs/observation.hpp"

#include <algorithm>
#include <cmath>

#include "flowvs/errors.hpp"

namespace flowvs {

FeatureGrid::FeatureGrid(int c, int r, int w, int h)
    : cols(c), rows(r), image_width(w), image_height(h) {
  if (c <= 0 || r <= 0 || c * r < 6)
    throw InvalidArgument("FeatureGrid: need at least 6 nodes (2N >= 6 rows)");
  if (w <= 0 || h <= 0) throw InvalidArgument("FeatureGrid: empty image");
}

std::size_t FlowField::valid_count() const {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
}

double FlowField::norm() const {
  double sum = 0.0;
  for (std::size_t i = 0; i < size(); ++i)
    if (valid[i]) sum += displacement[i].squaredNorm();
  return std::sqrt(sum);
}

std::size_t DepthMap::valid_count() const {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
}

RenderedImage render_image(const Scene& scene, const Pose& pose, const Intrinsics& k) {
  return render_image(scene, pose, k, {});
}

RenderedImage render_image(const Scene& scene, const Pose& pose, const Intrinsics& k,
                           std::span<const std::uint8_t> needed) {
  if (!scene.is_plane()) throw UnsupportedScene("render_image: point clouds are not rendered");
  const std::size_t n = static_cast<std::size_t>(k.width) * k.height;
  if (!needed.empty() && needed.size() != n)
    throw InvalidArgument("render_image: pixel mask does not match the image size");
  const TexturedPlane& plane = scene.plane();
  RenderedImage out{Image(k.width, k.height), std::vector<std::uint8_t>(n, 0)};
  const SceneView view(scene, pose, k);
  for (int y = 0; y < k.height; ++y) {
    for (int x = 0; x < k.width; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * k.width + static_cast<std::size_t>(x);
      const Vec2 px(x, y);
      const auto z = (needed.empty() || needed[idx]) ? view.depth(px) : std::nullopt;
      if (!z) {
        out.miss[idx] = 1;
        continue;
      }
      out.image.at(x, y) = plane.texture(plane.plane_coords(pose * unproject(px, *z, k)));
    }
  }
  return out;
}

Eigen::Vector2i nearest_pixel(const FeatureGrid& grid, std::size_t i) {
  const Vec2 n = grid.node(i);
  const int x = std::clamp(static_cast<int>(std::lround(n.x())), 0, grid.image_width - 1);
  const int y = std::clamp(static_cast<int>(std::lround(n.y())), 0, grid.image_height - 1);
  return {x, y};
}

std::vector<double> render_grid_samples(const Scene& scene, const Pose& pose, const FeatureGrid& grid,
                                        const Intrinsics& k) {
  if (!scene.is_plane()) throw UnsupportedScene("render_grid_samples: point clouds are not rendered");
  const TexturedPlane& plane = scene.plane();
  const SceneView view(scene, pose, k);
  std::vector<double> out(grid.size(), std::nan(""));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec2 px = nearest_pixel(grid, i).cast<double>();
    if (const auto z = view.depth(px))
      out[i] = plane.texture(plane.plane_coords(pose * unproject(px, *z, k)));
  }
  return out;
}

namespace {

// Shared by the grid and per-pixel variants; `node(i)` gives the pixel
// coordinate of output cell i.
template <typename NodeFn>
FlowField reproject(const SceneView& view_a, const Pose& pose_b, int w, int h, NodeFn node) {
  const Intrinsics& k = view_a.intrinsics();
  const Pose b_from_a = relative(view_a.pose(), pose_b);
  const bool same = b_from_a == Pose::Identity();
  FlowField flow(w, h);
  for (std::size_t i = 0; i < flow.size(); ++i) {
    const Vec2 px_a = node(i);
    const auto z = view_a.depth(px_a);
    if (!z) continue;
    if (same) {
      flow.set(i, Vec2::Zero());
      continue;
    }
    const Vec3 p_b = b_from_a * unproject(px_a, *z, k);
    if (!(p_b.z() > 0)) continue;
    const Vec2 px_b = project(p_b, k);
    if (!k.contains(px_b)) continue;
    flow.set(i, px_b - px_a);
  }
  return flow;
}

Vec2 pixel_of(std::size_t i, int w) {
  return {static_cast<double>(i % static_cast<std::size_t>(w)),
          static_cast<double>(i / static_cast<std::size_t>(w))};
}

}  // namespace

FlowField oracle_flow(const SceneView& view_a, const Pose& pose_b, const FeatureGrid& grid) {
  return reproject(view_a, pose_b, grid.cols, grid.rows,
                   [&](std::size_t i) { return grid.node(i); });
}

FlowField oracle_flow_dense(const SceneView& view_a, const Pose& pose_b) {
  const Intrinsics& k = view_a.intrinsics();
  return reproject(view_a, pose_b, k.width, k.height,
                   [&](std::size_t i) { return pixel_of(i, k.width); });
}

DepthMap true_depth_dense(const SceneView& view) {
  const Intrinsics& k = view.intrinsics();
  DepthMap out(k.width, k.height);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (const auto z = view.depth(pixel_of(i, k.width))) {
      out.depth[i] = *z;
      out.valid[i] = 1;
    }
  }
  return out;
}

FlowField oracle_flow(const Scene& scene, const Pose& pose_a, const Pose& pose_b,
                      const FeatureGrid& grid, const Intrinsics& k) {
  return oracle_flow(SceneView(scene, pose_a, k), pose_b, grid);
}

DepthMap flow_depth(const FlowField& flow, double alpha) {
  if (!(alpha > 0)) throw InvalidArgument("flow_depth: alpha must be > 0");
  DepthMap out(flow.width, flow.height);
  for (std::size_t i = 0; i < flow.size(); ++i) {
    out.valid[i] = 1;
    const double mag = flow.valid[i] ? flow.displacement[i].norm() : 0.0;
    if (!std::isfinite(alpha) || mag < kMinFlowForDepth) {
      out.depth[i] = kDepthDefault;
      continue;
    }
    out.depth[i] = std::clamp(alpha / mag, kDepthMin, kDepthMax);
  }
  return out;
}

double calibrate_alpha(const Twist& commanded_step, double dt, const Intrinsics& k) {
  const double speed = commanded_step.linear.norm();
  if (speed < 1e-9) return kAlphaUnknown;
  return speed * dt * k.fx;
}

DepthMap true_depth(const SceneView& view, const FeatureGrid& grid) {
  DepthMap out(grid.cols, grid.rows);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (const auto z = view.depth(grid.node(i))) {
      out.depth[i] = *z;
      out.valid[i] = 1;
    }
  }
  return out;
}

DepthMap true_depth(const Scene& scene, const Pose& pose, const FeatureGrid& grid,
                    const Intrinsics& k) {
  return true_depth(SceneView(scene, pose, k), grid);
}

namespace {

std::size_t grid_source_index(const FeatureGrid& grid, std::size_t i, int w, int h) {
  // Map the node into the provider's resolution, then take the nearest pixel.
  const Vec2 n = grid.node(i);
  const double sx = static_cast<double>(w) / grid.image_width;
  const double sy = static_cast<double>(h) / grid.image_height;
  const int x = std::clamp(static_cast<int>(std::lround(n.x() * sx)), 0, w - 1);
  const int y = std::clamp(static_cast<int>(std::lround(n.y() * sy)), 0, h - 1);
  return static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x);
}

}  // namespace

FlowField sample_to_grid(const FlowField& full, const FeatureGrid& grid) {
  if (full.width <= 0 || full.height <= 0) throw InvalidArgument("sample_to_grid: empty flow");
  const double sx = static_cast<double>(full.width) / grid.image_width;
  const double sy = static_cast<double>(full.height) / grid.image_height;
  FlowField out(grid.cols, grid.rows);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::size_t j = grid_source_index(grid, i, full.width, full.height);
    if (!full.valid[j]) continue;
    const Vec2 d = full.displacement[j];
    // Displacements are rescaled into feature-grid image pixels.
    out.set(i, {d.x() / sx, d.y() / sy});
  }
  return out;
}

DepthMap sample_to_grid(const DepthMap& full, const FeatureGrid& grid) {
  if (full.width <= 0 || full.height <= 0) throw InvalidArgument("sample_to_grid: empty depth");
  DepthMap out(grid.cols, grid.rows);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::size_t j = grid_source_index(grid, i, full.width, full.height);
    if (!full.valid[j]) continue;
    out.depth[i] = full.depth[j];
    out.valid[i] = 1;
  }
  return out;
}

double median_relative_depth_error(const DepthMap& estimate, const DepthMap& truth) {
  std::vector<double> errs;
  const std::size_t n = std::min(estimate.size(), truth.size());
  for (std::size_t i = 0; i < n; ++i)
    if (estimate.valid[i] && truth.valid[i] && truth.depth[i] > 0)
      errs.push_back(std::abs(estimate.depth[i] - truth.depth[i]) / truth.depth[i]);
  if (errs.empty()) return std::nan("");
  const auto mid = errs.begin() + static_cast<std::ptrdiff_t>(errs.size() / 2);
  std::nth_element(errs.begin(), mid, errs.end());
  double m = *mid;
  if (errs.size() % 2 == 0) m = 0.5 * (m + *std::max_element(errs.begin(), mid));
  return m;
}

}  // namespace flowvs

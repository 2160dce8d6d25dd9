#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "flowvs/feature_grid.hpp"
#include "flowvs/geometry.hpp"
#include "flowvs/scene.hpp"

namespace flowvs {

/// Per-node 2D displacements (pixels). Invalid nodes hold (0, 0).
struct FlowField {
  int width = 0;
  int height = 0;
  std::vector<Vec2> displacement;
  std::vector<std::uint8_t> valid;

  FlowField() = default;
  FlowField(int w, int h)
      : width(w), height(h),
        displacement(static_cast<std::size_t>(w) * h, Vec2::Zero()),
        valid(static_cast<std::size_t>(w) * h, 0) {}

  std::size_t size() const { return displacement.size(); }
  std::size_t valid_count() const;
  /// Euclidean norm over valid nodes, in pixels.
  double norm() const;
  void set(std::size_t i, const Vec2& d) {
    displacement[i] = d;
    valid[i] = 1;
  }
  void invalidate(std::size_t i) {
    displacement[i] = Vec2::Zero();
    valid[i] = 0;
  }
};

/// Per-node z-depth in meters.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> depth;
  std::vector<std::uint8_t> valid;

  DepthMap() = default;
  DepthMap(int w, int h)
      : width(w), height(h), depth(static_cast<std::size_t>(w) * h, 0.0),
        valid(static_cast<std::size_t>(w) * h, 0) {}

  std::size_t size() const { return depth.size(); }
  std::size_t valid_count() const;
};

/// Row-major intensities in [0, 1]; pixel (x, y) samples continuous image
/// coordinate (x, y).
struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> intensity;

  Image() = default;
  Image(int w, int h) : width(w), height(h), intensity(static_cast<std::size_t>(w) * h, 0.0) {}

  double at(int x, int y) const {
    return intensity[static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x)];
  }
  double& at(int x, int y) {
    return intensity[static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x)];
  }
  bool operator==(const Image&) const = default;
};

struct RenderedImage {
  Image image;
  std::vector<std::uint8_t> miss;  // 1 where the pixel ray misses the plane
};

inline constexpr double kDepthMin = 0.1;
inline constexpr double kDepthMax = 10.0;
inline constexpr double kDepthDefault = 1.0;
inline constexpr double kMinFlowForDepth = 1e-6;  // pixels

/// Alpha returned by calibrate_alpha when the previous step had no
/// translation; flow_depth maps it to kDepthDefault everywhere.
inline constexpr double kAlphaUnknown = std::numeric_limits<double>::infinity();

/// Throws UnsupportedScene for point clouds.
RenderedImage render_image(const Scene& scene, const Pose& pose, const Intrinsics& k);

/// Renders only pixels with a non-zero `needed` entry; the rest are reported
/// as misses. Rendered pixels are identical to the full render.
RenderedImage render_image(const Scene& scene, const Pose& pose, const Intrinsics& k,
                           std::span<const std::uint8_t> needed);

/// Intensities at the pixels nearest each grid node; misses are NaN.
std::vector<double> render_grid_samples(const Scene& scene, const Pose& pose, const FeatureGrid& grid,
                                        const Intrinsics& k);

/// Integer pixel nearest to grid node i.
Eigen::Vector2i nearest_pixel(const FeatureGrid& grid, std::size_t i);

/// Geometric flow a -> b on the grid: back-project each node through the
/// view's pose, reproject into `pose_b`.
FlowField oracle_flow(const SceneView& view_a, const Pose& pose_b, const FeatureGrid& grid);
FlowField oracle_flow(const Scene& scene, const Pose& pose_a, const Pose& pose_b,
                      const FeatureGrid& grid, const Intrinsics& k);

/// Two-view depth proxy z = alpha / |flow|, clamped to [kDepthMin, kDepthMax].
/// Nodes with invalid or near-zero flow get kDepthDefault. Throws
/// InvalidArgument when alpha <= 0.
DepthMap flow_depth(const FlowField& flow, double alpha);

/// |linear| * dt * fx, or kAlphaUnknown when |linear| < 1e-9.
double calibrate_alpha(const Twist& commanded_step, double dt, const Intrinsics& k);

DepthMap true_depth(const SceneView& view, const FeatureGrid& grid);

/// Image-resolution variants, one value per integer pixel; used to produce
/// provider files for the external-input methods.
FlowField oracle_flow_dense(const SceneView& view_a, const Pose& pose_b);
DepthMap true_depth_dense(const SceneView& view);
DepthMap true_depth(const Scene& scene, const Pose& pose, const FeatureGrid& grid,
                    const Intrinsics& k);

/// Nearest-node resampling of full-resolution provider data onto the grid.
FlowField sample_to_grid(const FlowField& full, const FeatureGrid& grid);
DepthMap sample_to_grid(const DepthMap& full, const FeatureGrid& grid);

/// Median of |est - truth| / truth over nodes valid in both; NaN when none.
double median_relative_depth_error(const DepthMap& estimate, const DepthMap& truth);

}  // namespace flowvs

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "flowvs/geometry.hpp"

namespace flowvs {

struct Sinusoid {
  double amplitude = 0.0;
  Vec2 frequency = Vec2::Zero();  // cycles per meter along the plane axes
  double phase = 0.0;             // radians
};

/// Intensity field 0.5 + sum_k A_k sin(2 pi f_k . q + phi_k), clamped to [0, 1].
class ProceduralTexture {
 public:
  ProceduralTexture() = default;
  explicit ProceduralTexture(std::vector<Sinusoid> terms);

  double raw(const Vec2& q) const;
  double operator()(const Vec2& q) const;
  /// Gradient of the unclamped field.
  Vec2 gradient(const Vec2& q) const;

  const std::vector<Sinusoid>& terms() const { return terms_; }

 private:
  std::vector<Sinusoid> terms_;
};

struct BoundingBox {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();
  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
};

/// Finite textured plane n.p = d, a square of half-size `half_extent` centred
/// on the foot point d*n.
struct TexturedPlane {
  Vec3 normal = Vec3::UnitZ();
  double offset = 2.0;
  Vec3 axis_u = Vec3::UnitX();  // in-plane orthonormal basis
  Vec3 axis_v = Vec3::UnitY();
  double half_extent = 20.0;
  ProceduralTexture texture;

  Vec3 origin() const { return offset * normal; }
  Vec2 plane_coords(const Vec3& p) const {
    const Vec3 r = p - origin();
    return {axis_u.dot(r), axis_v.dot(r)};
  }
};

struct ScenePoint {
  Vec3 position = Vec3::Zero();
  double intensity = 0.0;
};

struct PointCloud {
  std::vector<ScenePoint> points;
};

enum class SceneVariant { TexturedPlane, PointCloud };

std::string to_string(SceneVariant v);
SceneVariant scene_variant_from_string(const std::string& s);

/// Generation parameters. Fields for the other variant are ignored but kept
/// so a scene file round-trips.
struct SceneParams {
  // PointCloud
  int num_points = 30000;
  Vec3 box_min{-6.0, -4.5, 3.5};
  Vec3 box_max{6.0, 4.5, 7.5};
  // TexturedPlane
  double plane_distance_min = 3.5;
  double plane_distance_max = 5.0;
  double plane_max_tilt_deg = 20.0;
  double plane_half_extent = 20.0;
  int texture_terms = 10;
  double texture_freq_min = 0.3;  // cycles/m
  double texture_freq_max = 1.2;
  double texture_amp_min = 0.03;
  double texture_amp_max = 0.06;

  bool operator==(const SceneParams&) const = default;
};

class Scene {
 public:
  SceneVariant variant() const { return variant_; }
  std::uint64_t seed() const { return seed_; }
  const SceneParams& params() const { return params_; }
  const BoundingBox& bounds() const { return bounds_; }

  bool is_plane() const { return variant_ == SceneVariant::TexturedPlane; }
  const TexturedPlane& plane() const { return std::get<TexturedPlane>(geometry_); }
  const PointCloud& cloud() const { return std::get<PointCloud>(geometry_); }

  bool operator==(const Scene& o) const;

 private:
  friend Scene generate_scene(std::uint64_t, SceneVariant, const SceneParams&);

  SceneVariant variant_ = SceneVariant::TexturedPlane;
  std::uint64_t seed_ = 0;
  SceneParams params_;
  BoundingBox bounds_;
  std::variant<TexturedPlane, PointCloud> geometry_;
};

/// Deterministic in (seed, variant, params). Throws InvalidArgument on bad params.
Scene generate_scene(std::uint64_t seed, SceneVariant variant, const SceneParams& params = {});

/// Pixel-match radius for point-cloud depth queries.
inline constexpr double kPointMatchRadius = 1.5;

/// Depth lookups for one (scene, pose, intrinsics) triple. For point clouds the
/// constructor projects the cloud once into a pixel bucket grid; each query
/// returns the smallest z among points projecting within kPointMatchRadius.
class SceneView {
 public:
  SceneView(const Scene& scene, const Pose& pose, const Intrinsics& k);

  std::optional<double> depth(const Vec2& px) const;

  const Scene& scene() const { return *scene_; }
  const Pose& pose() const { return pose_; }
  const Intrinsics& intrinsics() const { return k_; }

 private:
  std::optional<double> plane_depth(const Vec2& px) const;
  std::optional<double> cloud_depth(const Vec2& px) const;

  const Scene* scene_;
  Pose pose_;
  Intrinsics k_;
  // Point-cloud bucket grid (counting-sorted by cell).
  double cell_ = 2.0;
  int cells_x_ = 0;
  int cells_y_ = 0;
  std::vector<int> cell_start_;
  std::vector<Vec3> projected_;  // (u, v, z)
};

/// z-depth of the scene surface seen through `px`, or nullopt on a miss.
std::optional<double> query_depth(const Scene& scene, const Pose& pose, const Vec2& px,
                                  const Intrinsics& k);

/// Scene intensity seen through `px` (plane scenes only), or nullopt on a miss.
std::optional<double> query_intensity(const Scene& scene, const Pose& pose, const Vec2& px,
                                      const Intrinsics& k);

enum class Difficulty { Easy, Medium, Hard };

std::string to_string(Difficulty d);
Difficulty difficulty_from_string(const std::string& s);

struct DifficultyBand {
  double t_min, t_max;  // meters
  double r_min, r_max;  // degrees
};

DifficultyBand difficulty_band(Difficulty d);

struct ServoTask {
  std::shared_ptr<const Scene> scene;
  Pose initial_pose;
  Pose desired_pose;
  Difficulty difficulty = Difficulty::Easy;
  std::uint64_t seed = 0;
};

/// Fraction of the default 32x32 feature grid that hits scene geometry at `pose`.
double observed_fraction(const Scene& scene, const Pose& pose, const Intrinsics& k);

inline constexpr double kMinObservedFraction = 0.8;
inline constexpr int kMaxTaskAttempts = 100;

/// Samples an initial/desired pose pair whose offset lies in the band of
/// `difficulty`. Throws TaskGenerationError after kMaxTaskAttempts
/// unobservable draws.
ServoTask sample_task(std::uint64_t seed, Difficulty difficulty,
                      std::shared_ptr<const Scene> scene,
                      const Intrinsics& k = Intrinsics::Default());

}  // namespace flowvs

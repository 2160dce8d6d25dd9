#include "flowvs/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "flowvs/errors.hpp"
#include "flowvs/feature_grid.hpp"
#include "flowvs/rng.hpp"

namespace flowvs {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kDeg = std::numbers::pi / 180.0;

// Any unit vector orthogonal to n.
Vec3 orthogonal_unit(const Vec3& n) {
  const Vec3 helper = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  return (helper - helper.dot(n) * n).normalized();
}

void validate(SceneVariant variant, const SceneParams& p) {
  if (variant == SceneVariant::PointCloud) {
    if (p.num_points < 500 || p.num_points > 100000)
      throw InvalidArgument("generate_scene: num_points must be in [500, 100000]");
    if (!p.box_min.allFinite() || !p.box_max.allFinite() ||
        !(p.box_max.array() > p.box_min.array()).all())
      throw InvalidArgument("generate_scene: empty or non-finite point-cloud box");
  } else {
    if (!(p.plane_distance_min > 0) || !(p.plane_distance_max >= p.plane_distance_min))
      throw InvalidArgument("generate_scene: bad plane distance range");
    if (!(p.plane_max_tilt_deg >= 0 && p.plane_max_tilt_deg < 80))
      throw InvalidArgument("generate_scene: plane tilt must be in [0, 80) degrees");
    if (!(p.plane_half_extent > 0)) throw InvalidArgument("generate_scene: bad plane extent");
    if (p.texture_terms < 8) throw InvalidArgument("generate_scene: need >= 8 texture terms");
    if (!(p.texture_freq_min > 0 && p.texture_freq_max >= p.texture_freq_min))
      throw InvalidArgument("generate_scene: bad texture frequency range");
    if (!(p.texture_amp_min >= 0 && p.texture_amp_max >= p.texture_amp_min))
      throw InvalidArgument("generate_scene: bad texture amplitude range");
  }
}

}  // namespace

ProceduralTexture::ProceduralTexture(std::vector<Sinusoid> terms) : terms_(std::move(terms)) {}

double ProceduralTexture::raw(const Vec2& q) const {
  double value = 0.5;
  for (const auto& t : terms_) value += t.amplitude * std::sin(kTwoPi * t.frequency.dot(q) + t.phase);
  return value;
}

double ProceduralTexture::operator()(const Vec2& q) const { return std::clamp(raw(q), 0.0, 1.0); }

Vec2 ProceduralTexture::gradient(const Vec2& q) const {
  Vec2 g = Vec2::Zero();
  for (const auto& t : terms_)
    g += t.amplitude * kTwoPi * std::cos(kTwoPi * t.frequency.dot(q) + t.phase) * t.frequency;
  return g;
}

std::string to_string(SceneVariant v) {
  return v == SceneVariant::PointCloud ? "point-cloud" : "textured-plane";
}

SceneVariant scene_variant_from_string(const std::string& s) {
  if (s == "point-cloud" || s == "cloud") return SceneVariant::PointCloud;
  if (s == "textured-plane" || s == "plane") return SceneVariant::TexturedPlane;
  throw InvalidArgument("unknown scene variant '" + s + "'");
}

bool Scene::operator==(const Scene& o) const {
  if (variant_ != o.variant_ || seed_ != o.seed_ || !(params_ == o.params_) ||
      bounds_.min != o.bounds_.min || bounds_.max != o.bounds_.max)
    return false;
  if (is_plane()) {
    const auto& a = plane();
    const auto& b = o.plane();
    if (a.normal != b.normal || a.offset != b.offset || a.axis_u != b.axis_u ||
        a.axis_v != b.axis_v || a.half_extent != b.half_extent ||
        a.texture.terms().size() != b.texture.terms().size())
      return false;
    for (std::size_t i = 0; i < a.texture.terms().size(); ++i) {
      const auto& s = a.texture.terms()[i];
      const auto& t = b.texture.terms()[i];
      if (s.amplitude != t.amplitude || s.frequency != t.frequency || s.phase != t.phase)
        return false;
    }
    return true;
  }
  const auto& a = cloud().points;
  const auto& b = o.cloud().points;
  return std::equal(a.begin(), a.end(), b.begin(), b.end(), [](const auto& p, const auto& q) {
    return p.position == q.position && p.intensity == q.intensity;
  });
}

Scene generate_scene(std::uint64_t seed, SceneVariant variant, const SceneParams& params) {
  validate(variant, params);
  Rng rng(seed);
  Scene scene;
  scene.variant_ = variant;
  scene.seed_ = seed;
  scene.params_ = params;

  if (variant == SceneVariant::PointCloud) {
    PointCloud cloud;
    cloud.points.resize(static_cast<std::size_t>(params.num_points));
    for (auto& p : cloud.points) {
      p.position = {rng.uniform(params.box_min.x(), params.box_max.x()),
                    rng.uniform(params.box_min.y(), params.box_max.y()),
                    rng.uniform(params.box_min.z(), params.box_max.z())};
      p.intensity = rng.uniform();
    }
    scene.bounds_ = {params.box_min, params.box_max};
    scene.geometry_ = std::move(cloud);
    return scene;
  }

  TexturedPlane plane;
  // Normal tilted away from +z by at most plane_max_tilt_deg.
  const double tilt = rng.uniform(0.0, params.plane_max_tilt_deg) * kDeg;
  const double azimuth = rng.uniform(0.0, kTwoPi);
  plane.normal = Vec3(std::sin(tilt) * std::cos(azimuth), std::sin(tilt) * std::sin(azimuth),
                      std::cos(tilt))
                     .normalized();
  plane.offset = rng.uniform(params.plane_distance_min, params.plane_distance_max);
  plane.axis_u = orthogonal_unit(plane.normal);
  plane.axis_v = plane.normal.cross(plane.axis_u).normalized();
  plane.half_extent = params.plane_half_extent;

  std::vector<Sinusoid> terms(static_cast<std::size_t>(params.texture_terms));
  for (auto& t : terms) {
    t.amplitude = rng.uniform(params.texture_amp_min, params.texture_amp_max);
    const double f = rng.uniform(params.texture_freq_min, params.texture_freq_max);
    const double dir = rng.uniform(0.0, kTwoPi);
    t.frequency = {f * std::cos(dir), f * std::sin(dir)};
    t.phase = rng.uniform(0.0, kTwoPi);
  }
  plane.texture = ProceduralTexture(std::move(terms));

  // Box enclosing the finite textured square.
  const Vec3 o = plane.origin();
  const Vec3 reach = plane.half_extent * (plane.axis_u.cwiseAbs() + plane.axis_v.cwiseAbs());
  scene.bounds_ = {o - reach, o + reach};
  scene.geometry_ = std::move(plane);
  return scene;
}

SceneView::SceneView(const Scene& scene, const Pose& pose, const Intrinsics& k)
    : scene_(&scene), pose_(pose), k_(k) {
  if (scene.is_plane()) return;

  cells_x_ = static_cast<int>(std::ceil((k.width + 2 * kPointMatchRadius) / cell_)) + 1;
  cells_y_ = static_cast<int>(std::ceil((k.height + 2 * kPointMatchRadius) / cell_)) + 1;
  const std::size_t n_cells = static_cast<std::size_t>(cells_x_) * cells_y_;

  const Pose cam_from_world = pose.inverse();
  const Eigen::Matrix3d& R = cam_from_world.rotation;
  const Vec3& t = cam_from_world.translation;

  std::vector<Vec3> tmp;
  std::vector<int> cell_of;
  tmp.reserve(scene.cloud().points.size());
  cell_of.reserve(scene.cloud().points.size());
  std::vector<int> counts(n_cells + 1, 0);
  for (const auto& p : scene.cloud().points) {
    const Vec3 pc = R * p.position + t;
    if (!(pc.z() > 0)) continue;
    const double u = k.fx * pc.x() / pc.z() + k.cx;
    const double v = k.fy * pc.y() / pc.z() + k.cy;
    if (u < -kPointMatchRadius || v < -kPointMatchRadius || u >= k.width + kPointMatchRadius ||
        v >= k.height + kPointMatchRadius)
      continue;
    const int cx = static_cast<int>((u + kPointMatchRadius) / cell_);
    const int cy = static_cast<int>((v + kPointMatchRadius) / cell_);
    const int cell = cy * cells_x_ + cx;
    tmp.emplace_back(u, v, pc.z());
    cell_of.push_back(cell);
    ++counts[static_cast<std::size_t>(cell) + 1];
  }
  for (std::size_t i = 1; i < counts.size(); ++i) counts[i] += counts[i - 1];
  cell_start_ = counts;
  projected_.resize(tmp.size());
  std::vector<int> fill(counts.begin(), counts.end() - 1);
  for (std::size_t i = 0; i < tmp.size(); ++i)
    projected_[static_cast<std::size_t>(fill[static_cast<std::size_t>(cell_of[i])]++)] = tmp[i];
}

std::optional<double> SceneView::depth(const Vec2& px) const {
  return scene_->is_plane() ? plane_depth(px) : cloud_depth(px);
}

std::optional<double> SceneView::plane_depth(const Vec2& px) const {
  const TexturedPlane& plane = scene_->plane();
  const Vec3 ray_cam((px.x() - k_.cx) / k_.fx, (px.y() - k_.cy) / k_.fy, 1.0);
  const Vec3 ray_world = pose_.rotation * ray_cam;
  const double denom = plane.normal.dot(ray_world);
  if (std::abs(denom) < 1e-12) return std::nullopt;
  const double s = (plane.offset - plane.normal.dot(pose_.translation)) / denom;
  if (!(s > 0)) return std::nullopt;
  const Vec2 q = plane.plane_coords(pose_.translation + s * ray_world);
  if (std::abs(q.x()) > plane.half_extent || std::abs(q.y()) > plane.half_extent)
    return std::nullopt;
  return s;  // ray_cam has unit z, so s is the z-depth
}

std::optional<double> SceneView::cloud_depth(const Vec2& px) const {
  constexpr double r2 = kPointMatchRadius * kPointMatchRadius;
  const int x0 = std::max(0, static_cast<int>((px.x()) / cell_));
  const int x1 = std::min(cells_x_ - 1, static_cast<int>((px.x() + 2 * kPointMatchRadius) / cell_));
  const int y0 = std::max(0, static_cast<int>((px.y()) / cell_));
  const int y1 = std::min(cells_y_ - 1, static_cast<int>((px.y() + 2 * kPointMatchRadius) / cell_));
  double best = std::numeric_limits<double>::infinity();
  for (int cy = y0; cy <= y1; ++cy) {
    for (int cx = x0; cx <= x1; ++cx) {
      const int cell = cy * cells_x_ + cx;
      for (int i = cell_start_[static_cast<std::size_t>(cell)];
           i < cell_start_[static_cast<std::size_t>(cell) + 1]; ++i) {
        const auto& p = projected_[static_cast<std::size_t>(i)];
        const double du = p.x() - px.x();
        const double dv = p.y() - px.y();
        if (du * du + dv * dv <= r2 && p.z() < best) best = p.z();
      }
    }
  }
  if (!std::isfinite(best)) return std::nullopt;
  return best;
}

std::optional<double> query_depth(const Scene& scene, const Pose& pose, const Vec2& px,
                                  const Intrinsics& k) {
  return SceneView(scene, pose, k).depth(px);
}

std::optional<double> query_intensity(const Scene& scene, const Pose& pose, const Vec2& px,
                                      const Intrinsics& k) {
  if (!scene.is_plane()) return std::nullopt;
  const auto z = SceneView(scene, pose, k).depth(px);
  if (!z) return std::nullopt;
  const Vec3 p = pose * unproject(px, *z, k);
  return scene.plane().texture(scene.plane().plane_coords(p));
}

std::string to_string(Difficulty d) {
  switch (d) {
    case Difficulty::Easy: return "easy";
    case Difficulty::Medium: return "medium";
    case Difficulty::Hard: return "hard";
  }
  return "easy";
}

Difficulty difficulty_from_string(const std::string& s) {
  if (s == "easy") return Difficulty::Easy;
  if (s == "medium") return Difficulty::Medium;
  if (s == "hard") return Difficulty::Hard;
  throw InvalidArgument("unknown difficulty '" + s + "'");
}

DifficultyBand difficulty_band(Difficulty d) {
  switch (d) {
    case Difficulty::Easy: return {1.0, 1.4, 5.0, 15.0};
    case Difficulty::Medium: return {1.4, 1.6, 15.0, 25.0};
    case Difficulty::Hard: return {2.0, 3.0, 30.0, 50.0};
  }
  return {1.0, 1.4, 5.0, 15.0};
}

double observed_fraction(const Scene& scene, const Pose& pose, const Intrinsics& k) {
  const FeatureGrid grid(k);
  const SceneView view(scene, pose, k);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (view.depth(grid.node(i))) ++hits;
  return static_cast<double>(hits) / static_cast<double>(grid.size());
}

ServoTask sample_task(std::uint64_t seed, Difficulty difficulty,
                      std::shared_ptr<const Scene> scene, const Intrinsics& k) {
  if (!scene) throw InvalidArgument("sample_task: null scene");
  const DifficultyBand band = difficulty_band(difficulty);
  Rng rng(mix_seed(seed, 0x7a5c));

  for (int attempt = 0; attempt < kMaxTaskAttempts; ++attempt) {
    // Goal camera: near the origin, roughly facing +z.
    const Vec3 goal_t(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3));
    const Vec3 goal_axis = rng.unit_vector();
    const double goal_angle = rng.uniform(0.0, 5.0) * kDeg;
    const Pose desired(rotation_from_axis_angle(goal_angle * goal_axis), goal_t);

    const Vec3 dir = rng.unit_vector();
    const double dist = rng.uniform(band.t_min, band.t_max);
    const Vec3 axis = rng.unit_vector();
    const double angle = rng.uniform(band.r_min, band.r_max) * kDeg;
    const Pose offset(rotation_from_axis_angle(angle * axis), desired.rotation.transpose() * dir * dist);
    const Pose initial = desired * offset;

    if (observed_fraction(*scene, desired, k) < kMinObservedFraction) continue;

    ServoTask task;
    task.scene = scene;
    task.initial_pose = initial;
    task.desired_pose = desired;
    task.difficulty = difficulty;
    task.seed = seed;
    return task;
  }
  throw TaskGenerationError("sample_task: no observable goal pose after " +
                            std::to_string(kMaxTaskAttempts) + " attempts");
}

}  // namespace flowvs

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace flowvs {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;

/// Camera velocity (linear, angular) expressed in the current camera frame.
struct Twist {
  Vec3 linear = Vec3::Zero();
  Vec3 angular = Vec3::Zero();

  Twist() = default;
  Twist(const Vec3& v, const Vec3& w) : linear(v), angular(w) {}

  static Twist FromVector(const Vec6& xi) { return {xi.head<3>(), xi.tail<3>()}; }
  Vec6 vector() const {
    Vec6 xi;
    xi << linear, angular;
    return xi;
  }
  bool allFinite() const { return linear.allFinite() && angular.allFinite(); }
  bool operator==(const Twist& o) const { return linear == o.linear && angular == o.angular; }
};

/// Rigid transform mapping camera-frame points into the world frame.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Pose() = default;
  Pose(const Mat3& r, const Vec3& t) : rotation(r), translation(t) {}

  static Pose Identity() { return {}; }

  Pose operator*(const Pose& o) const {
    return {rotation * o.rotation, rotation * o.translation + translation};
  }
  Vec3 operator*(const Vec3& p) const { return rotation * p + translation; }
  Pose inverse() const {
    Mat3 rt = rotation.transpose();
    return {rt, -(rt * translation)};
  }

  bool operator==(const Pose& o) const {
    return rotation == o.rotation && translation == o.translation;
  }

  /// True when rotation is orthonormal with det +1 (tolerance 1e-9) and all
  /// entries are finite.
  bool isValid(double tol = 1e-9) const;
};

/// Transform taking points in frame `a` into frame `b`: b^-1 * a. Bitwise
/// equal poses give the exact identity.
Pose relative(const Pose& a, const Pose& b);

Mat3 skew(const Vec3& w);

/// SE(3) exponential of xi*dt. Throws InvalidArgument on non-finite input or dt < 0.
Pose exp_twist(const Twist& xi, double dt);

/// Principal SE(3) logarithm (rotation angle in [0, pi]).
Twist log_pose(const Pose& p);

struct PoseError {
  double t_err = 0.0;  // meters
  double r_err = 0.0;  // degrees
};

PoseError pose_error(const Pose& current, const Pose& desired);

/// Rotation from an axis-angle vector (angle = norm, radians).
Mat3 rotation_from_axis_angle(const Vec3& rotvec);

/// Pinhole intrinsics. Pixel coordinates are continuous, image domain is
/// [0, width) x [0, height).
struct Intrinsics {
  double fx = 100.0;
  double fy = 100.0;
  double cx = 80.0;
  double cy = 60.0;
  int width = 160;
  int height = 120;

  static Intrinsics Default() { return {}; }

  bool isValid() const {
    return fx > 0 && fy > 0 && cx >= 0 && cx < width && cy >= 0 && cy < height && width > 0 &&
           height > 0;
  }
  bool contains(double u, double v) const { return u >= 0 && v >= 0 && u < width && v < height; }
  bool contains(const Vec2& px) const { return contains(px.x(), px.y()); }

  Vec2 normalize(const Vec2& px) const { return {(px.x() - cx) / fx, (px.y() - cy) / fy}; }
  Vec2 denormalize(const Vec2& xy) const { return {xy.x() * fx + cx, xy.y() * fy + cy}; }
};

/// Throws BehindCamera when Z <= 0.
Vec2 project(const Vec3& point_cam, const Intrinsics& k);

/// Camera-frame point at z-depth `depth` along the ray through `px`.
Vec3 unproject(const Vec2& px, double depth, const Intrinsics& k);

}  // namespace flowvs

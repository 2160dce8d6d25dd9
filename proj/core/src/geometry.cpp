#include "flowvs/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "flowvs/errors.hpp"

namespace flowvs {

namespace {

constexpr double kSmallAngle = 1e-8;
// Beyond this angle the axis is read from the symmetric part of R, which
// stays well conditioned up to and including pi.
constexpr double kNearPi = 0.75 * std::numbers::pi;

Vec3 vee(const Mat3& m) { return {m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1)}; }

}  // namespace

bool Pose::isValid(double tol) const {
  if (!rotation.allFinite() || !translation.allFinite()) return false;
  const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).norm();
  return ortho <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
}

Pose relative(const Pose& a, const Pose& b) {
  if (a == b) return Pose::Identity();
  return b.inverse() * a;
}

Mat3 skew(const Vec3& w) {
  Mat3 m;
  m << 0, -w.z(), w.y(),  //
      w.z(), 0, -w.x(),   //
      -w.y(), w.x(), 0;
  return m;
}

Mat3 rotation_from_axis_angle(const Vec3& rotvec) {
  const double theta = rotvec.norm();
  const Mat3 W = skew(rotvec);
  if (theta < kSmallAngle) return Mat3::Identity() + W + 0.5 * W * W;
  const double a = std::sin(theta) / theta;
  const double half = std::sin(0.5 * theta);
  const double b = 2.0 * half * half / (theta * theta);
  return Mat3::Identity() + a * W + b * W * W;
}

Pose exp_twist(const Twist& xi, double dt) {
  if (!xi.allFinite() || !std::isfinite(dt)) throw InvalidArgument("exp_twist: non-finite input");
  if (dt < 0) throw InvalidArgument("exp_twist: dt must be >= 0");

  const Vec3 rho = xi.linear * dt;
  const Vec3 phi = xi.angular * dt;
  const double theta = phi.norm();
  const Mat3 W = skew(phi);
  const Mat3 W2 = W * W;

  Mat3 R;
  Mat3 V;
  if (theta < kSmallAngle) {
    R = Mat3::Identity() + W + 0.5 * W2;
    V = Mat3::Identity() + 0.5 * W + W2 / 6.0;
  } else {
    const double t2 = theta * theta;
    const double s = std::sin(theta);
    const double half = std::sin(0.5 * theta);
    const double one_minus_cos = 2.0 * half * half;
    // (theta - sin) / theta^3 cancels badly for small angles; use its series there.
    const double c3 = theta < 1e-3 ? 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0
                                   : (theta - s) / (t2 * theta);
    R = Mat3::Identity() + (s / theta) * W + (one_minus_cos / t2) * W2;
    V = Mat3::Identity() + (one_minus_cos / t2) * W + c3 * W2;
  }
  return {R, V * rho};
}

Twist log_pose(const Pose& p) {
  if (!p.isValid()) throw InvalidArgument("log_pose: rotation is not in SO(3)");
  const Mat3& R = p.rotation;

  const Vec3 v = vee(R);  // 2 sin(theta) * axis
  const double cos_theta = std::clamp((R.trace() - 1.0) / 2.0, -1.0, 1.0);
  const double theta = std::atan2(0.5 * v.norm(), cos_theta);

  Vec3 phi;
  if (theta < kSmallAngle) {
    phi = 0.5 * v;
  } else if (theta < kNearPi) {
    phi = (theta / (2.0 * std::sin(theta))) * v;
  } else {
    // R + R^T = 2 cos(theta) I + 2 (1 - cos(theta)) a a^T
    const Mat3 aat = (0.5 * (R + R.transpose()) - cos_theta * Mat3::Identity()) / (1.0 - cos_theta);
    Eigen::Index col = 0;
    aat.diagonal().maxCoeff(&col);
    Vec3 axis = aat.col(col) / std::sqrt(std::max(aat(col, col), 1e-300));
    axis.normalize();
    if (axis.dot(v) < 0) axis = -axis;
    phi = theta * axis;
  }

  const Mat3 W = skew(phi);
  Mat3 V_inv;
  if (theta < kSmallAngle) {
    V_inv = Mat3::Identity() - 0.5 * W + (W * W) / 12.0;
  } else {
    const double half = std::sin(0.5 * theta);
    const double t2 = theta * theta;
    const double coef = theta < 1e-3
                            ? 1.0 / 12.0 + t2 / 720.0
                            : (1.0 - theta * std::sin(theta) / (4.0 * half * half)) / t2;
    V_inv = Mat3::Identity() - 0.5 * W + coef * W * W;
  }
  return {V_inv * p.translation, phi};
}

PoseError pose_error(const Pose& current, const Pose& desired) {
  PoseError e;
  e.t_err = (current.translation - desired.translation).norm();
  // trace(Rc^T Rd) as an elementwise sum, symmetric in its arguments.
  const double tr = (current.rotation.array() * desired.rotation.array()).sum();
  const double c = std::clamp((tr - 1.0) / 2.0, -1.0, 1.0);
  e.r_err = std::acos(c) * 180.0 / std::numbers::pi;
  return e;
}

Vec2 project(const Vec3& point_cam, const Intrinsics& k) {
  if (!(point_cam.z() > 0)) throw BehindCamera("project: point is behind the camera");
  return {k.fx * point_cam.x() / point_cam.z() + k.cx, k.fy * point_cam.y() / point_cam.z() + k.cy};
}

Vec3 unproject(const Vec2& px, double depth, const Intrinsics& k) {
  return {(px.x() - k.cx) / k.fx * depth, (px.y() - k.cy) / k.fy * depth, depth};
}

}  // namespace flowvs

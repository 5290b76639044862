#pragma once
// Rigid-body spatial math: unit-quaternion rotations, poses, ZYX roll-pitch-yaw
// conversions and wrapped per-axis orientation errors.

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace orbitarm {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wraps an angle into the half-open interval (-pi, pi].
inline double wrap_angle(double a) {
  double r = a - kTwoPi * std::ceil((a - kPi) / kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  if (r > kPi) r -= kTwoPi;
  return r;
}

inline Vec3 wrap_angles(const Vec3& v) {
  return {wrap_angle(v.x()), wrap_angle(v.y()), wrap_angle(v.z())};
}

/// Skew-symmetric cross-product matrix: skew(a) * b == a.cross(b).
inline Mat3 skew(const Vec3& a) {
  Mat3 s;
  s << 0.0, -a.z(), a.y(),
       a.z(), 0.0, -a.x(),
       -a.y(), a.x(), 0.0;
  return s;
}

/// Unit quaternion rotation, canonicalized to w >= 0.
class Rotation {
 public:
  Rotation() : q_(Eigen::Quaterniond::Identity()) {}
  explicit Rotation(const Eigen::Quaterniond& q) : q_(q) { canonicalize(); }
  explicit Rotation(const Mat3& m) : q_(m) { canonicalize(); }

  static Rotation identity() { return Rotation(); }
  static Rotation about_axis(const Vec3& axis, double angle) {
    return Rotation(Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis.normalized())));
  }
  /// Intrinsic Z-Y-X composition: Rz(yaw) * Ry(pitch) * Rx(roll).
  static Rotation from_rpy(double roll, double pitch, double yaw) {
    Eigen::Quaterniond q = Eigen::AngleAxisd(yaw, Vec3::UnitZ()) *
                           Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
                           Eigen::AngleAxisd(roll, Vec3::UnitX());
    return Rotation(q);
  }
  static Rotation from_rpy(const Vec3& rpy) { return from_rpy(rpy.x(), rpy.y(), rpy.z()); }
  /// exp map of a rotation vector (axis * angle).
  static Rotation exp(const Vec3& rotvec) {
    const double angle = rotvec.norm();
    if (angle < 1e-300) return Rotation();
    return about_axis(rotvec / angle, angle);
  }

  const Eigen::Quaterniond& quaternion() const { return q_; }
  Mat3 matrix() const { return q_.toRotationMatrix(); }
  Rotation inverse() const { return Rotation(q_.conjugate()); }
  Vec3 rotate(const Vec3& v) const { return q_ * v; }
  /// Rotation vector of this rotation, angle in [0, pi].
  Vec3 log() const {
    const Vec3 v = q_.vec();
    const double s = v.norm();
    if (s < 1e-300) return Vec3::Zero();
    const double angle = 2.0 * std::atan2(s, q_.w());
    return v / s * angle;
  }

  friend Rotation operator*(const Rotation& a, const Rotation& b) {
    return Rotation(a.q_ * b.q_);
  }

 private:
  void canonicalize() {
    q_.normalize();
    if (q_.w() < 0.0) q_.coeffs() = -q_.coeffs();
  }

  Eigen::Quaterniond q_;
};

struct Pose {
  Vec3 position = Vec3::Zero();
  Rotation orientation;

  static Pose identity() { return {}; }
  static Pose translation(const Vec3& p) { return {p, Rotation()}; }

  Vec3 transform_point(const Vec3& p) const { return position + orientation.rotate(p); }
  Pose inverse() const {
    const Rotation inv = orientation.inverse();
    return {-inv.rotate(position), inv};
  }
  friend Pose operator*(const Pose& a, const Pose& b) {
    return {a.position + a.orientation.rotate(b.position), a.orientation * b.orientation};
  }
};

struct RpyResult {
  Vec3 rpy = Vec3::Zero();
  // Pitch within 1e-6 of +-pi/2: roll is folded into yaw and reported as 0.
  bool gimbal_lock = false;
};

inline constexpr double kGimbalMargin = 1e-6;

/// ZYX roll-pitch-yaw. roll, yaw in (-pi, pi]; pitch in [-pi/2, pi/2].
inline RpyResult rpy_of(const Rotation& rotation) {
  const Mat3 r = rotation.matrix();
  RpyResult out;
  const double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  if (std::abs(pitch) > kPi / 2.0 - kGimbalMargin) {
    out.gimbal_lock = true;
    out.rpy = {0.0, pitch, wrap_angle(std::atan2(-r(0, 1), r(1, 1)))};
    return out;
  }
  out.rpy = {wrap_angle(std::atan2(r(2, 1), r(2, 2))), pitch,
             wrap_angle(std::atan2(r(1, 0), r(0, 0)))};
  return out;
}

/// Per-axis (roll, pitch, yaw) difference target - current, each in (-pi, pi].
struct OrientationError {
  Vec3 value = Vec3::Zero();
  bool gimbal_lock = false;

  double max_abs() const { return value.cwiseAbs().maxCoeff(); }
};

inline OrientationError orientation_error(const Rotation& current, const Rotation& target) {
  const RpyResult c = rpy_of(current);
  const RpyResult t = rpy_of(target);
  return {wrap_angles(t.rpy - c.rpy), c.gimbal_lock || t.gimbal_lock};
}

}  // namespace orbitarm

#pragma once
// Capsule and box proximity queries used for self, base and target collision checks.

#include <orbitarm/spatial.hpp>

#include <algorithm>
#include <cmath>

namespace orbitarm {

struct Segment {
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
};

struct Capsule {
  Segment axis;
  double radius = 0.0;
};

struct Box {
  Pose pose;                              // center and orientation
  Vec3 half_extents = Vec3::Zero();
};

/// Closest points between two segments (Ericson, Real-Time Collision Detection 5.1.9).
inline double segment_segment_distance(const Segment& s1, const Segment& s2) {
  constexpr double kEps = 1e-15;
  const Vec3 d1 = s1.b - s1.a;
  const Vec3 d2 = s2.b - s2.a;
  const Vec3 r = s1.a - s2.a;
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  const double f = d2.dot(r);
  double s = 0.0, t = 0.0;
  if (a <= kEps && e <= kEps) return r.norm();
  if (a <= kEps) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= kEps) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > kEps * a * e ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return ((s1.a + d1 * s) - (s2.a + d2 * t)).norm();
}

inline double point_box_distance(const Vec3& p, const Box& box) {
  const Vec3 local = box.pose.inverse().transform_point(p);
  const Vec3 outside = (local.cwiseAbs() - box.half_extents).cwiseMax(0.0);
  return outside.norm();
}

/// Distance from a segment to a solid box. The point-to-box distance is convex
/// along the segment, so a golden-section search on the parameter is exact to
/// machine precision.
inline double segment_box_distance(const Segment& s, const Box& box) {
  const Pose inv = box.pose.inverse();
  const Vec3 a = inv.transform_point(s.a);
  const Vec3 d = inv.transform_point(s.b) - a;
  auto f = [&](double t) {
    const Vec3 p = a + d * t;
    return (p.cwiseAbs() - box.half_extents).cwiseMax(0.0).norm();
  };
  constexpr double kInvPhi = 0.6180339887498949;
  double lo = 0.0, hi = 1.0;
  double x1 = hi - kInvPhi * (hi - lo), x2 = lo + kInvPhi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 80; ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = f(x2);
    }
  }
  return std::min({f(0.0), f(1.0), f1, f2});
}

/// Surface separation; <= 0 means touching or penetrating.
inline double capsule_capsule_separation(const Capsule& c1, const Capsule& c2) {
  return segment_segment_distance(c1.axis, c2.axis) - c1.radius - c2.radius;
}

inline double capsule_box_separation(const Capsule& c, const Box& box) {
  return segment_box_distance(c.axis, box) - c.radius;
}

}  // namespace orbitarm

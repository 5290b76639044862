#pragma once
// Prior policy: straight-line Cartesian interpolation toward each grasp point
// plus one damped-least-squares, position-only, fixed-base IK step per arm.

#include <orbitarm/ffsr_kinematics.hpp>
#include <orbitarm/robot_model.hpp>

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace orbitarm {

struct PriorConfig {
  double damping = 0.05;       // lambda
  double step_length = 0.01;   // m between waypoints
  double control_period = 0.05;       // s per env step
  double max_joint_velocity = 0.1;    // rad/s represented by |action| = 1
};

struct InterpolationPlan {
  std::vector<Vec3> waypoints;  // start, start + step * u, ..., target
  double step_length = 0.0;
};

inline InterpolationPlan interpolate(const Vec3& current, const Vec3& target, double step_length) {
  if (!(step_length > 0.0)) throw std::invalid_argument("interpolation step must be positive");
  InterpolationPlan plan;
  plan.step_length = step_length;
  const Vec3 delta = target - current;
  const double length = delta.norm();
  if (length == 0.0) {
    plan.waypoints.push_back(target);
    return plan;
  }
  const Vec3 u = delta / length;
  const int n = static_cast<int>(std::ceil(length / step_length - 1e-9));
  plan.waypoints.reserve(n + 1);
  plan.waypoints.push_back(current);
  for (int k = 1; k < n; ++k) plan.waypoints.push_back(current + u * (k * step_length));
  plan.waypoints.push_back(target);
  return plan;
}

/// Nearest waypoint strictly ahead of `position`'s projection on the plan segment.
inline Vec3 next_waypoint(const InterpolationPlan& plan, const Vec3& position) {
  const Vec3& start = plan.waypoints.front();
  const Vec3& end = plan.waypoints.back();
  const Vec3 seg = end - start;
  const double len2 = seg.squaredNorm();
  if (len2 == 0.0) return end;
  const double s = (position - start).dot(seg) / len2;
  for (const Vec3& w : plan.waypoints)
    if ((w - start).dot(seg) / len2 > s + 1e-12) return w;
  return end;
}

/// One DLS step on the 3x6 positional Jacobian with the base frozen.
inline JointVec fixed_base_ik_step(const ArmKinematics& fk, const Vec3& waypoint, double damping) {
  const Eigen::Matrix<double, 3, kArmDof> jv = arm_jacobian(fk).topRows<3>();
  const Vec3 err = waypoint - fk.end_effector.position;
  const Mat3 a = jv * jv.transpose() + damping * damping * Mat3::Identity();
  return jv.transpose() * a.llt().solve(err);
}

inline JointVec fixed_base_ik_step(const ArmModel& arm, const JointVec& q, const Pose& base_pose,
                                   const Vec3& waypoint, double damping) {
  return fixed_base_ik_step(forward_kinematics(arm, q, base_pose), waypoint, damping);
}

/// Normalized joint-velocity direction in [-1, 1]^12. Each arm's IK step is
/// expressed as the joint rate that covers it in one control period, in units
/// of the joint-rate limit, then shrunk (never amplified) into the unit box.
inline SystemVec prior_action(const RobotModel& model, const RobotSystemState& state,
                              const std::array<Vec3, kNumArms>& targets, const PriorConfig& cfg) {
  SystemVec action = SystemVec::Zero();
  const auto fk = arm_kinematics(model, state);
  for (int a = 0; a < kNumArms; ++a) {
    const Vec3 current = fk[a].end_effector.position;
    const InterpolationPlan plan = interpolate(current, targets[a], cfg.step_length);
    const Vec3 waypoint = next_waypoint(plan, current);
    JointVec rate = fixed_base_ik_step(fk[a], waypoint, cfg.damping) /
                    (cfg.control_period * cfg.max_joint_velocity);
    rate /= std::max(1.0, rate.cwiseAbs().maxCoeff());
    action.segment<kArmDof>(kArmDof * a) = rate;
  }
  return action;
}

}  // namespace orbitarm

#pragma once
// Free-floating coupling between the base body and both arms: momentum maps,
// base velocity resolution under zero momentum, the generalized Jacobian and
// momentum-conserving velocity-level state propagation.

#include <orbitarm/robot_model.hpp>
#include <orbitarm/spatial.hpp>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <array>
#include <stdexcept>

namespace orbitarm {

using SystemVec = Eigen::Matrix<double, kTotalDof, 1>;
using Mat6x12 = Eigen::Matrix<double, 6, kTotalDof>;
using Mat12 = Eigen::Matrix<double, kTotalDof, kTotalDof>;

struct RobotSystemState {
  Pose base_pose;
  Vec6 base_velocity = Vec6::Zero();  // [linear; angular], world frame
  std::array<JointVec, kNumArms> q{JointVec::Zero(), JointVec::Zero()};
  std::array<JointVec, kNumArms> qd{JointVec::Zero(), JointVec::Zero()};
  bool joint_limit_violation = false;

  SystemVec joint_angles() const { return (SystemVec() << q[0], q[1]).finished(); }
  SystemVec joint_velocities() const { return (SystemVec() << qd[0], qd[1]).finished(); }
};

struct MomentumMatrices {
  Mat6 hb = Mat6::Zero();
  std::array<Mat66, kNumArms> hr{Mat66::Zero(), Mat66::Zero()};
};

struct GeneralizedJacobian {
  Mat12 jg = Mat12::Zero();
  Mat6x12 ja = Mat6x12::Zero();
};

class IllConditionedBase : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kMaxBaseCondition = 1e12;

inline std::array<ArmKinematics, kNumArms> arm_kinematics(const RobotModel& model,
                                                          const RobotSystemState& state) {
  return {forward_kinematics(model.arms[0], state.q[0], state.base_pose),
          forward_kinematics(model.arms[1], state.q[1], state.base_pose)};
}

/// Stacked momentum map [H_b | H_r1 | H_r2] about the base origin, built body
/// by body from each body's velocity Jacobian.
inline MomentumMatrices momentum_matrices(const RobotModel& model, const RobotSystemState& state,
                                          const std::array<ArmKinematics, kNumArms>& fk) {
  MomentumMatrices h;
  const Vec3 pb = state.base_pose.position;
  const Mat3 rb = state.base_pose.orientation.matrix();

  auto add_base_columns = [&](double m, const Vec3& r, const Mat3& inertia_world) {
    const Mat3 sr = skew(r);
    h.hb.block<3, 3>(0, 0) += m * Mat3::Identity();
    h.hb.block<3, 3>(0, 3) += -m * sr;
    h.hb.block<3, 3>(3, 0) += m * sr;
    h.hb.block<3, 3>(3, 3) += inertia_world - m * sr * sr;
  };

  add_base_columns(model.base.mass, rb * model.base.com,
                   rb * model.base.inertia * rb.transpose());

  for (int a = 0; a < kNumArms; ++a) {
    const ArmModel& arm = model.arms[a];
    for (int k = 0; k < kArmDof; ++k) {
      const LinkInertia& link = arm.links[k];
      const Vec3& c = fk[a].link_coms[k];
      const Vec3 r = c - pb;
      const Mat3 rl = fk[a].link_frames[k].orientation.matrix();
      const Mat3 inertia_world = rl * link.inertia * rl.transpose();
      add_base_columns(link.mass, r, inertia_world);
      for (int j = 0; j <= k; ++j) {
        const Vec3 v = fk[a].joint_axes[j].cross(c - fk[a].joint_origins[j]);
        h.hr[a].block<3, 1>(0, j) += link.mass * v;
        h.hr[a].block<3, 1>(3, j) +=
            inertia_world * fk[a].joint_axes[j] + link.mass * r.cross(v);
      }
    }
  }
  return h;
}

inline MomentumMatrices momentum_matrices(const RobotModel& model, const RobotSystemState& state) {
  return momentum_matrices(model, state, arm_kinematics(model, state));
}

/// System [linear; angular] momentum about the base origin.
inline Vec6 system_momentum(const MomentumMatrices& h, const Vec6& base_velocity,
                            const SystemVec& qd) {
  return h.hb * base_velocity + h.hr[0] * qd.head<kArmDof>() + h.hr[1] * qd.tail<kArmDof>();
}

inline Vec6 system_momentum(const RobotModel& model, const RobotSystemState& state) {
  return system_momentum(momentum_matrices(model, state), state.base_velocity,
                         state.joint_velocities());
}

/// J_a = -H_b^{-1} [H_r1, H_r2].
inline Mat6x12 base_coupling(const MomentumMatrices& h) {
  Eigen::SelfAdjointEigenSolver<Mat6> eig(h.hb, Eigen::EigenvaluesOnly);
  const auto ev = eig.eigenvalues();
  if (!(ev.minCoeff() > 0.0) || ev.maxCoeff() / ev.minCoeff() > kMaxBaseCondition)
    throw IllConditionedBase("base inertia matrix is singular or ill-conditioned");
  Eigen::LLT<Mat6> llt(h.hb);
  if (llt.info() != Eigen::Success)
    throw IllConditionedBase("base inertia matrix is not positive definite");
  Mat6x12 hr;
  hr << h.hr[0], h.hr[1];
  return -llt.solve(hr);
}

/// Base velocity that keeps total momentum at zero for the given joint rates.
inline Vec6 base_velocity(const SystemVec& qd, const MomentumMatrices& h) {
  return base_coupling(h) * qd;
}

/// Maps base [v; w] to the velocity of a point p on the end-effector.
inline Mat6 base_to_point_jacobian(const Vec3& p, const Vec3& base_origin) {
  Mat6 jb = Mat6::Identity();
  jb.block<3, 3>(0, 3) = -skew(p - base_origin);
  return jb;
}

inline GeneralizedJacobian generalized_jacobian(const RobotModel& model,
                                                const RobotSystemState& state) {
  const auto fk = arm_kinematics(model, state);
  const MomentumMatrices h = momentum_matrices(model, state, fk);
  GeneralizedJacobian g;
  g.ja = base_coupling(h);
  for (int i = 0; i < kNumArms; ++i) {
    const Mat6 jb = base_to_point_jacobian(fk[i].end_effector.position, state.base_pose.position);
    const Mat6x12 coupled = jb * g.ja;
    g.jg.block<6, kTotalDof>(6 * i, 0) = coupled;
    g.jg.block<6, kArmDof>(6 * i, kArmDof * i) += arm_jacobian(fk[i]);
  }
  return g;
}

struct IntegratorConfig {
  double dt = 0.05;
  int substeps = 5;
};

/// Velocity-level step: joints follow qd_cmd, the base follows from zero
/// momentum. qd_cmd is clamped to each joint's velocity limit.
inline RobotSystemState propagate_state(const RobotModel& model, const RobotSystemState& state,
                                        const SystemVec& qd_cmd, const IntegratorConfig& cfg) {
  if (!(cfg.dt > 0.0) || cfg.substeps < 1)
    throw std::invalid_argument("propagate_state: dt must be positive");
  SystemVec qd = qd_cmd;
  for (int a = 0; a < kNumArms; ++a)
    for (int j = 0; j < kArmDof; ++j) {
      const double lim = model.arms[a].joints[j].velocity_limit;
      qd[kArmDof * a + j] = std::clamp(qd[kArmDof * a + j], -lim, lim);
    }

  RobotSystemState next = state;
  next.qd = {qd.head<kArmDof>(), qd.tail<kArmDof>()};
  const double h = cfg.dt / cfg.substeps;
  // Explicit midpoint rule: the base twist is evaluated half a substep ahead.
  auto advance = [&](const RobotSystemState& from, const Vec6& vb, double dt) {
    RobotSystemState to = from;
    to.q[0] += qd.head<kArmDof>() * dt;
    to.q[1] += qd.tail<kArmDof>() * dt;
    to.base_pose.position += vb.head<3>() * dt;
    to.base_pose.orientation = Rotation::exp(vb.tail<3>() * dt) * from.base_pose.orientation;
    return to;
  };
  for (int s = 0; s < cfg.substeps; ++s) {
    const Vec6 vb0 = base_velocity(qd, momentum_matrices(model, next));
    const RobotSystemState mid = advance(next, vb0, 0.5 * h);
    next = advance(next, base_velocity(qd, momentum_matrices(model, mid)), h);
  }
  next.base_velocity = base_velocity(qd, momentum_matrices(model, next));

  next.joint_limit_violation = false;
  for (int a = 0; a < kNumArms; ++a)
    for (int j = 0; j < kArmDof; ++j)
      if (std::abs(next.q[a][j]) > model.arms[a].joints[j].angle_limit)
        next.joint_limit_violation = true;
  return next;
}

}  // namespace orbitarm

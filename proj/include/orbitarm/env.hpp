#pragma once
// Episodic dual-arm capture environment: observation assembly, action scaling,
// target spin, collision checks and termination.

#include <orbitarm/collision.hpp>
#include <orbitarm/ffsr_kinematics.hpp>
#include <orbitarm/prior_policy.hpp>
#include <orbitarm/rewards.hpp>
#include <orbitarm/robot_model.hpp>
#include <orbitarm/spatial.hpp>

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>

namespace orbitarm {

inline constexpr int kObsDim = 60;
inline constexpr int kActionDim = kTotalDof;

using Observation = Eigen::Matrix<double, kObsDim, 1>;
using Action = SystemVec;

struct TargetSpec {
  Vec3 center = Vec3(0.75, 0.0, 1.0);
  double yaw = 0.0;         // rotation about the target z-axis
  double spin_rate = 0.0;   // rad/s about the target z-axis
  std::array<Pose, kNumArms> grasp{
      Pose{Vec3(0.0, 0.18, 0.0), Rotation::from_rpy(kPi / 2.0, 0.0, 0.0)},
      Pose{Vec3(0.0, -0.18, 0.0), Rotation::from_rpy(-kPi / 2.0, 0.0, 0.0)}};

  Pose pose() const { return Pose{center, Rotation::about_axis(Vec3::UnitZ(), yaw)}; }
  Pose grasp_pose(int arm) const { return pose() * grasp[arm]; }
};

struct CollisionGeometry {
  std::array<double, kArmDof> link_radius{0.06, 0.055, 0.045, 0.04, 0.04, 0.035};
  Vec3 target_half_extents = Vec3(0.05, 0.05, 0.05);
  // Links of one arm closer than this in the chain are not checked against each other.
  int min_link_separation = 3;
};

enum class EnvMode { kTrain, kEval };

struct EnvConfig {
  RobotModel model = default_robot_model();
  IntegratorConfig integrator;
  double max_joint_velocity = 0.1;  // rad/s
  int episode_length = 200;
  std::array<JointVec, kNumArms> home{
      (JointVec() << 2.6446, -1.8768, 2.0347, -3.2995, -2.6446, -3.3916).finished(),
      (JointVec() << 0.4970, -1.2648, -2.0347, 0.1579, 2.6446, 0.2500).finished()};
  TargetSpec target;
  double yaw_range = kPi / 3.0;     // reset draws yaw uniform in [-range, range]
  bool randomize_yaw = true;
  double eval_spin_rate = 0.0;      // rad/s, used in eval mode only
  CollisionGeometry geometry;
  RewardConfig reward;
  double collision_penalty = 0.0;
  PriorConfig prior;

  PriorConfig prior_config() const {
    PriorConfig p = prior;
    p.control_period = integrator.dt;
    p.max_joint_velocity = max_joint_velocity;
    return p;
  }
};

struct CollisionReport {
  bool collision = false;
  double min_separation = std::numeric_limits<double>::infinity();
  std::string closest_pair;
};

inline std::array<Capsule, kArmDof> arm_capsules(const ArmKinematics& fk,
                                                 const CollisionGeometry& geom) {
  std::array<Capsule, kArmDof> caps;
  for (int k = 0; k < kArmDof; ++k) {
    const Vec3 end = (k + 1 < kArmDof) ? fk.joint_origins[k + 1] : fk.end_effector.position;
    caps[k] = Capsule{Segment{fk.joint_origins[k], end}, geom.link_radius[k]};
  }
  return caps;
}

inline Box base_box(const RobotModel& model, const Pose& base_pose) {
  return Box{base_pose * Pose::translation(model.base.com), model.base.size / 2.0};
}

/// Collision iff any checked pair has separation <= 0. Checked pairs: links of
/// one arm at least `min_link_separation` apart, every arm-arm pair, arm links
/// other than the mounted first link against the base, and arm links other
/// than the flange link against the target body.
inline CollisionReport check_collision(const RobotModel& model, const RobotSystemState& state,
                                       const Pose& target_pose, const CollisionGeometry& geom) {
  const auto fk = arm_kinematics(model, state);
  const std::array<std::array<Capsule, kArmDof>, kNumArms> caps{arm_capsules(fk[0], geom),
                                                                arm_capsules(fk[1], geom)};
  const Box base = base_box(model, state.base_pose);
  const Box target{target_pose, geom.target_half_extents};

  CollisionReport report;
  auto consider = [&](double sep, auto&& name) {
    if (sep < report.min_separation) {
      report.min_separation = sep;
      report.closest_pair = name();
    }
  };
  auto link_name = [](int arm, int k) {
    return "arm" + std::to_string(arm + 1) + ".link" + std::to_string(k + 1);
  };

  for (int a = 0; a < kNumArms; ++a) {
    for (int i = 0; i < kArmDof; ++i)
      for (int j = i + geom.min_link_separation; j < kArmDof; ++j)
        consider(capsule_capsule_separation(caps[a][i], caps[a][j]),
                 [&] { return link_name(a, i) + "/" + link_name(a, j); });
    for (int i = 1; i < kArmDof; ++i)
      consider(capsule_box_separation(caps[a][i], base),
               [&] { return link_name(a, i) + "/base"; });
    for (int i = 0; i + 1 < kArmDof; ++i)
      consider(capsule_box_separation(caps[a][i], target),
               [&] { return link_name(a, i) + "/target"; });
  }
  for (int i = 0; i < kArmDof; ++i)
    for (int j = 0; j < kArmDof; ++j)
      consider(capsule_capsule_separation(caps[0][i], caps[1][j]),
               [&] { return link_name(0, i) + "/" + link_name(1, j); });
  report.collision = report.min_separation <= 0.0;
  return report;
}

/// Pose errors of both arms against their grasp poses.
struct TrackingErrors {
  std::array<Vec3, kNumArms> position{Vec3::Zero(), Vec3::Zero()};  // target - end-effector
  std::array<OrientationError, kNumArms> orientation{};
  std::array<Pose, kNumArms> end_effector{};
  std::array<Pose, kNumArms> target{};

  std::array<double, kNumArms> distance() const {
    return {position[0].norm(), position[1].norm()};
  }
  std::array<Vec3, kNumArms> orientation_values() const {
    return {orientation[0].value, orientation[1].value};
  }
};

inline TrackingErrors tracking_errors(const std::array<ArmKinematics, kNumArms>& fk,
                                      const TargetSpec& target) {
  TrackingErrors e;
  for (int a = 0; a < kNumArms; ++a) {
    e.end_effector[a] = fk[a].end_effector;
    e.target[a] = target.grasp_pose(a);
    e.position[a] = e.target[a].position - e.end_effector[a].position;
    e.orientation[a] = orientation_error(e.end_effector[a].orientation, e.target[a].orientation);
  }
  return e;
}

struct StepInfo {
  bool collision = false;
  bool joint_limit = false;
  bool timeout = false;
  bool success = false;
  bool gimbal_lock = false;
  RewardBreakdown reward;
  TrackingErrors errors;
  CollisionReport contact;
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

class Env {
 public:
  explicit Env(EnvConfig config = {}) : cfg_(std::move(config)) {
    cfg_.reward.validate();
    for (const auto& r : cfg_.geometry.link_radius)
      if (!(r > 0.0)) throw std::invalid_argument("collision radii must be positive");
  }

  const EnvConfig& config() const { return cfg_; }
  const RobotSystemState& state() const { return state_; }
  const TargetSpec& target() const { return target_; }
  int step_count() const { return steps_; }
  bool done() const { return done_; }

  /// Home pose, base at rest at the origin, target yaw drawn from the seed
  /// unless `yaw` is given. Spin is zero in train mode.
  Observation reset(std::uint64_t seed, EnvMode mode = EnvMode::kTrain,
                    std::optional<double> yaw = std::nullopt) {
    rng_.seed(seed);
    state_ = RobotSystemState{};
    state_.q = cfg_.home;
    target_ = cfg_.target;
    if (yaw) {
      target_.yaw = *yaw;
    } else if (cfg_.randomize_yaw) {
      std::uniform_real_distribution<double> dist(-cfg_.yaw_range, cfg_.yaw_range);
      target_.yaw = dist(rng_);
    }
    target_.spin_rate = (mode == EnvMode::kEval) ? cfg_.eval_spin_rate : 0.0;
    steps_ = 0;
    done_ = false;
    refresh();
    return observation();
  }

  StepResult step(const Action& action) {
    if (done_) throw std::logic_error("step() called on a finished episode");
    const Action clipped = action.cwiseMax(-1.0).cwiseMin(1.0);
    state_ = propagate_state(cfg_.model, state_, clipped * cfg_.max_joint_velocity,
                             cfg_.integrator);
    target_.yaw = wrap_angle(target_.yaw + target_.spin_rate * cfg_.integrator.dt);
    ++steps_;
    refresh();

    StepResult out;
    StepInfo& info = out.info;
    info.contact = check_collision(cfg_.model, state_, target_.pose(), cfg_.geometry);
    info.collision = info.contact.collision;
    info.joint_limit = state_.joint_limit_violation;
    info.timeout = steps_ >= cfg_.episode_length;
    info.errors = errors_;
    info.gimbal_lock = errors_.orientation[0].gimbal_lock || errors_.orientation[1].gimbal_lock;
    info.reward = total_reward(reward_inputs(), cfg_.reward);
    info.success = info.reward.success;
    out.reward = info.collision ? -cfg_.collision_penalty : info.reward.total;
    out.done = info.collision || info.joint_limit || info.timeout;
    done_ = out.done;
    out.observation = observation();
    return out;
  }

  const TrackingErrors& errors() const { return errors_; }
  const std::array<ArmKinematics, kNumArms>& kinematics() const { return fk_; }

  RewardInputs reward_inputs() const {
    RewardInputs in;
    in.distance = errors_.distance();
    in.orientation_error = errors_.orientation_values();
    in.jacobian = {arm_jacobian(fk_[0]), arm_jacobian(fk_[1])};
    return in;
  }

  Action prior_action() const {
    return orbitarm::prior_action(cfg_.model, state_,
                                  {target_.grasp_pose(0).position, target_.grasp_pose(1).position},
                                  cfg_.prior_config());
  }

  /// [q1 q2 | qd1 qd2 | (Pe, Phi_e) x2 | (Pt, Phi_t) x2 | e_p1 e_p2 | e_o1 e_o2]
  Observation observation() const {
    Observation o;
    int k = 0;
    auto put = [&](const auto& v) {
      for (int i = 0; i < v.size(); ++i) o[k++] = v[i];
    };
    for (int a = 0; a < kNumArms; ++a) {
      JointVec wrapped = state_.q[a];
      for (int j = 0; j < kArmDof; ++j) wrapped[j] = wrap_angle(wrapped[j]);
      put(wrapped);
    }
    for (int a = 0; a < kNumArms; ++a) put(state_.qd[a]);
    for (int a = 0; a < kNumArms; ++a) {
      put(errors_.end_effector[a].position);
      put(rpy_of(errors_.end_effector[a].orientation).rpy);
    }
    for (int a = 0; a < kNumArms; ++a) {
      put(errors_.target[a].position);
      put(rpy_of(errors_.target[a].orientation).rpy);
    }
    for (int a = 0; a < kNumArms; ++a) put(errors_.position[a]);
    for (int a = 0; a < kNumArms; ++a) put(errors_.orientation[a].value);
    return o;
  }

 private:
  void refresh() {
    fk_ = arm_kinematics(cfg_.model, state_);
    errors_ = tracking_errors(fk_, target_);
  }

  EnvConfig cfg_;
  RobotSystemState state_;
  TargetSpec target_;
  std::array<ArmKinematics, kNumArms> fk_{};
  TrackingErrors errors_;
  std::mt19937_64 rng_;
  int steps_ = 0;
  bool done_ = true;
};

}  // namespace orbitarm

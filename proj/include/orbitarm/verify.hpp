#pragma once
// Property suites behind the `verify` command and the acceptance binary.
// Each suite draws from its own seeded generator and reports the worst error
// it saw together with the first failing case.

#include <orbitarm/env.hpp>
#include <orbitarm/ffsr_kinematics.hpp>
#include <orbitarm/nn.hpp>
#include <orbitarm/policy_bound.hpp>
#include <orbitarm/rewards.hpp>
#include <orbitarm/robot_model.hpp>
#include <orbitarm/sac.hpp>
#include <orbitarm/toy_envs.hpp>

#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace orbitarm::verify {

struct CheckResult {
  std::string name;
  long cases = 0;
  long failures = 0;
  double worst = 0.0;      // largest error (or smallest margin) observed
  double threshold = 0.0;
  double seconds = 0.0;
  double time_limit = 0.0;  // 0: unlimited
  std::string first_failure;

  bool passed() const { return failures == 0 && (time_limit <= 0.0 || seconds <= time_limit); }

  void record(bool ok, double value, const std::function<std::string()>& describe) {
    ++cases;
    if (!ok) {
      ++failures;
      if (first_failure.empty()) first_failure = describe();
    }
    worst = std::max(worst, value);
  }
};

/// Counts, worst value and timing on one line.
inline std::string check_detail(const CheckResult& r) {
  std::ostringstream os;
  os << "cases=" << r.cases << " failures=" << r.failures << " worst=" << r.worst << " threshold=" << r.threshold
     << " time=" << r.seconds << "s";
  if (r.time_limit > 0.0) os << " (limit " << r.time_limit << "s)";
  if (!r.first_failure.empty()) os << "; first failure: " << r.first_failure;
  return os.str();
}

inline std::string summary_line(const CheckResult& r) {
  return std::string(r.passed() ? "PASS" : "FAIL") + "  " + r.name + "  " + check_detail(r);
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// ---------------------------------------------------------------------------
// Kinematics

inline RobotSystemState random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RobotSystemState s;
  for (int a = 0; a < kNumArms; ++a)
    for (int j = 0; j < kArmDof; ++j) s.q[a][j] = angle(rng);
  s.base_pose.position = Vec3(u(rng), u(rng), u(rng));
  s.base_pose.orientation = Rotation::exp(Vec3(u(rng), u(rng), u(rng)));
  return s;
}

inline SystemVec random_rates(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  SystemVec v;
  for (int i = 0; i < kTotalDof; ++i) v[i] = u(rng);
  return v;
}

/// Total linear and angular momentum about the world origin, summed body by
/// body from each body's own velocity (no momentum matrices involved).
inline Vec6 brute_force_momentum(const RobotModel& model, const RobotSystemState& state) {
  const Vec3 pb = state.base_pose.position;
  const Vec3 vb = state.base_velocity.head<3>();
  const Vec3 wb = state.base_velocity.tail<3>();
  Vec3 p = Vec3::Zero(), l = Vec3::Zero();
  auto add_body = [&](double m, const Vec3& c, const Mat3& inertia_world, const Vec3& v, const Vec3& w) {
    p += m * v;
    l += m * c.cross(v) + inertia_world * w;
  };
  {
    const Mat3 r = state.base_pose.orientation.matrix();
    const Vec3 c = state.base_pose.transform_point(model.base.com);
    add_body(model.base.mass, c, r * model.base.inertia * r.transpose(), vb + wb.cross(c - pb), wb);
  }
  const auto fk = arm_kinematics(model, state);
  for (int a = 0; a < kNumArms; ++a) {
    for (int k = 0; k < kArmDof; ++k) {
      const Vec3 c = fk[a].link_coms[k];
      Vec3 v = vb + wb.cross(c - pb);
      Vec3 w = wb;
      for (int j = 0; j <= k; ++j) {
        const Vec3 z = fk[a].joint_axes[j];
        v += z.cross(c - fk[a].joint_origins[j]) * state.qd[a][j];
        w += z * state.qd[a][j];
      }
      const Mat3 r = fk[a].link_frames[k].orientation.matrix();
      add_body(model.arms[a].links[k].mass, c, r * model.arms[a].links[k].inertia * r.transpose(), v, w);
    }
  }
  Vec6 out;
  out << p, l;
  return out;
}

/// Central difference of both end-effector twists along the momentum-conserving flow.
inline Eigen::Matrix<double, 12, 1> finite_difference_twists(const RobotModel& model, const RobotSystemState& s,
                                                             const SystemVec& qd, double h) {
  const IntegratorConfig one{h, 1};
  const RobotSystemState plus = propagate_state(model, s, qd, one);
  const RobotSystemState minus = propagate_state(model, s, -qd, one);
  const auto fp = arm_kinematics(model, plus);
  const auto fm = arm_kinematics(model, minus);
  Eigen::Matrix<double, 12, 1> v;
  for (int a = 0; a < kNumArms; ++a) {
    v.segment<3>(6 * a) = (fp[a].end_effector.position - fm[a].end_effector.position) / (2.0 * h);
    v.segment<3>(6 * a + 3) =
        (fp[a].end_effector.orientation * fm[a].end_effector.orientation.inverse()).log() / (2.0 * h);
  }
  return v;
}

inline CheckResult check_gjm_consistency(int samples = 500, std::uint64_t seed = 1) {
  CheckResult r;
  r.name = "kinematics.gjm_finite_difference";
  r.threshold = 1e-4;
  r.time_limit = 30.0;
  Stopwatch sw;
  const RobotModel model = default_robot_model();
  std::mt19937_64 rng(seed);
  for (int i = 0; i < samples; ++i) {
    // Velocities far above the joint limits: the check is on the linear map only.
    RobotSystemState s = random_state(rng);
    const SystemVec qd = random_rates(rng, 1.0);
    const auto jg = generalized_jacobian(model, s).jg;
    const Eigen::Matrix<double, 12, 1> analytic = jg * qd;
    const Eigen::Matrix<double, 12, 1> fd = finite_difference_twists(model, s, qd, 1e-6);
    const double err = (fd - analytic).norm() / std::max(analytic.norm(), 1e-12);
    r.record(err < r.threshold, err, [&] {
      std::ostringstream os;
      os << "sample " << i << " relative error " << err << " q=" << s.joint_angles().transpose();
      return os.str();
    });
  }
  r.seconds = sw.seconds();
  return r;
}

inline CheckResult check_momentum_conservation(int rollouts = 100, int steps = 200, std::uint64_t seed = 2) {
  CheckResult r;
  r.name = "kinematics.momentum_conservation";
  r.threshold = 1e-8;
  Stopwatch sw;
  const RobotModel model = default_robot_model();
  std::mt19937_64 rng(seed);
  const IntegratorConfig integ;
  for (int k = 0; k < rollouts; ++k) {
    RobotSystemState s;
    s.q = EnvConfig{}.home;
    for (int t = 0; t < steps; ++t) {
      s = propagate_state(model, s, random_rates(rng, 0.5), integ);
      const double res = brute_force_momentum(model, s).norm();
      r.record(res < r.threshold, res, [&] {
        std::ostringstream os;
        os << "rollout " << k << " step " << t << " residual " << res;
        return os.str();
      });
    }
  }
  r.seconds = sw.seconds();
  return r;
}

inline CheckResult check_fixed_base_limit(int samples = 50, double factor = 1e6, std::uint64_t seed = 3) {
  CheckResult r;
  r.name = "kinematics.fixed_base_limit";
  r.threshold = 1e-4;
  Stopwatch sw;
  const RobotModel model = with_base_mass(default_robot_model(), kDefaultBaseMass * factor);
  std::mt19937_64 rng(seed);
  for (int i = 0; i < samples; ++i) {
    const RobotSystemState s = random_state(rng);
    const auto fk = arm_kinematics(model, s);
    const Mat12 jg = generalized_jacobian(model, s).jg;
    double err = 0.0;
    for (int a = 0; a < kNumArms; ++a) {
      err = std::max(err, (jg.block<6, 6>(6 * a, 6 * a) - arm_jacobian(fk[a])).cwiseAbs().maxCoeff());
      err = std::max(err, jg.block<6, 6>(6 * a, 6 * (1 - a)).cwiseAbs().maxCoeff());
    }
    r.record(err < r.threshold, err, [&] {
      std::ostringstream os;
      os << "sample " << i << " max deviation " << err;
      return os.str();
    });
  }
  r.seconds = sw.seconds();
  return r;
}

// ---------------------------------------------------------------------------
// Rewards

using GradientFn = std::function<Vec3(const Vec3&, OrientationVariant)>;

inline CheckResult check_reward_spot_values() {
  CheckResult r;
  r.name = "rewards.spot_values";
  r.threshold = 1e-12;
  Stopwatch sw;
  struct Spot {
    const char* what;
    double value;
    double expected;
  };
  const Vec3 e(kPi / 2.0, 0.0, 0.0);
  const Vec3 f(0.3, -0.4, 0.1);
  // Expected values from 30-digit arithmetic, rounded to 17 significant digits.
  const std::vector<Spot> spots{
      {"r_p(0.5, 0.5)", position_reward(0.5, 0.5), 1.0757656854799805},
      {"r_p(0, 0)", position_reward(0.0, 0.0), 2.0},
      {"max_cos(pi/2, 0, 0)", orientation_reward(e, OrientationVariant::kMaxCos), 0.0},
      {"mean_cos(pi/2, 0, 0)", orientation_reward(e, OrientationVariant::kMeanCos), 2.0 / 3.0},
      {"l1(pi/2, 0, 0)", orientation_reward(e, OrientationVariant::kL1), 0.082847664332725654},
      {"l2(pi/2, 0, 0)", orientation_reward(e, OrientationVariant::kL2), 0.082847664332725654},
      {"max_cos(0.3, -0.4, 0.1)", orientation_reward(f, OrientationVariant::kMaxCos), 0.92106099400288508},
      {"mean_cos(0.3, -0.4, 0.1)", orientation_reward(f, OrientationVariant::kMeanCos), 0.95713388280217229},
      {"l1(0.3, -0.4, 0.1)", orientation_reward(f, OrientationVariant::kL1), 0.33596322973215104},
      {"l2(0.3, -0.4, 0.1)", orientation_reward(f, OrientationVariant::kL2), 0.53013119933342936},
  };
  for (const Spot& s : spots) {
    const double err = std::abs(s.value - s.expected);
    r.record(err <= r.threshold, err, [&] {
      std::ostringstream os;
      os.precision(17);
      os << s.what << " = " << s.value << ", expected " << s.expected;
      return os.str();
    });
  }
  r.seconds = sw.seconds();
  return r;
}

/// Random orientation errors away from the kinks of every variant.
inline Vec3 non_degenerate_error(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (;;) {
    const Vec3 e(u(rng), u(rng), u(rng));
    const Vec3 a = e.cwiseAbs();
    if (a.minCoeff() < 1e-3) continue;
    Vec3 sorted = a;
    std::sort(sorted.data(), sorted.data() + 3);
    if (sorted[2] - sorted[1] < 1e-3) continue;
    return e;
  }
}

inline CheckResult check_reward_gradients(int points = 1000, std::uint64_t seed = 4,
                                          const GradientFn& gradient = orientation_reward_gradient) {
  CheckResult r;
  r.name = "rewards.gradient_central_difference";
  r.threshold = 1e-6;
  Stopwatch sw;
  std::mt19937_64 rng(seed);
  const double h = 1e-6;
  for (OrientationVariant v :
       {OrientationVariant::kMaxCos, OrientationVariant::kL1, OrientationVariant::kL2, OrientationVariant::kMeanCos}) {
    for (int i = 0; i < points; ++i) {
      const Vec3 e = non_degenerate_error(rng);
      const Vec3 g = gradient(e, v);
      Vec3 fd;
      for (int k = 0; k < 3; ++k) {
        Vec3 ep = e, em = e;
        ep[k] += h;
        em[k] -= h;
        fd[k] = (orientation_reward(ep, v) - orientation_reward(em, v)) / (2.0 * h);
      }
      const double err = (g - fd).cwiseAbs().maxCoeff();
      r.record(err < r.threshold, err, [&] {
        std::ostringstream os;
        os << to_string(v) << " at e=" << e.transpose() << " analytic " << g.transpose() << " fd "
           << fd.transpose();
        return os.str();
      });
    }
  }
  r.seconds = sw.seconds();
  return r;
}

inline CheckResult check_success_branch() {
  CheckResult r;
  r.name = "rewards.success_branch";
  Stopwatch sw;
  const RewardConfig cfg;
  RewardInputs in;
  in.jacobian = {Mat66::Identity(), Mat66::Identity()};
  auto expect = [&](const char* what, bool want_success) {
    const RewardBreakdown b = total_reward(in, cfg);
    const bool ok = b.success == want_success && (!want_success || b.total == 3.0);
    r.record(ok, ok ? 0.0 : 1.0, [&] {
      std::ostringstream os;
      os << what << ": success=" << b.success << " total=" << b.total;
      return os.str();
    });
  };
  in.distance = {0.0, 0.0};
  expect("exact grasp", true);
  in.distance = {0.02, 0.02};
  in.orientation_error = {Vec3(0.05, -0.05, 0.05), Vec3(-0.05, 0.0, 0.05)};
  expect("on both thresholds", true);
  in.distance = {0.0200001, 0.0};
  expect("one arm just outside the position threshold", false);
  in.distance = {0.0, 0.0};
  in.orientation_error = {Vec3(0.0, 0.0500001, 0.0), Vec3::Zero()};
  expect("one axis just outside the orientation threshold", false);
  r.seconds = sw.seconds();
  return r;
}

// ---------------------------------------------------------------------------
// Policy bounds

inline CheckResult check_policy_bounds(long trials = 10000, std::uint64_t seed = 5) {
  CheckResult r;
  r.name = "bounds.mixed_policy_bias";
  r.threshold = kBoundTolerance;
  r.time_limit = 10.0;
  Stopwatch sw;
  std::mt19937_64 rng(seed);
  const PolicyBoundReport rep = verify_policy_bounds(trials, rng);
  r.cases = rep.trials;
  r.failures = rep.lower_bound_violations + rep.limit_equality_violations;
  r.worst = rep.max_limit_error;
  r.first_failure = rep.counterexample;
  r.seconds = sw.seconds();
  return r;
}

// ---------------------------------------------------------------------------
// SAC

/// Small random batch for the gradient checks.
inline sac::Batch random_batch(int obs, int act, int n, std::mt19937_64& rng) {
  sac::Batch b;
  b.states = nn::standard_normal(obs, n, rng);
  b.next_states = nn::standard_normal(obs, n, rng);
  b.actions = nn::standard_normal(act, n, rng).array().tanh();
  b.rewards = nn::standard_normal(n, 1, rng);
  b.terminals = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; j += 3) b.terminals[j] = 1.0;
  return b;
}

inline sac::SacConfig small_sac_config() {
  sac::SacConfig c;
  c.obs_dim = 5;
  c.act_dim = 3;
  c.actor_hidden = {16, 16};
  c.critic_hidden = {16, 16};
  c.batch_size = 8;
  c.buffer_capacity = 1000;
  return c;
}

/// Relative error of analytic vs central-difference gradient on `coords` random coordinates.
inline double gradient_check(Eigen::VectorXd& params, const Eigen::VectorXd& analytic,
                             const std::function<double()>& loss, int coords, std::mt19937_64& rng) {
  std::uniform_int_distribution<Eigen::Index> pick(0, params.size() - 1);
  const double h = 1e-6;
  double worst = 0.0;
  for (int c = 0; c < coords; ++c) {
    const Eigen::Index i = pick(rng);
    const double keep = params[i];
    params[i] = keep + h;
    const double up = loss();
    params[i] = keep - h;
    const double down = loss();
    params[i] = keep;
    const double fd = (up - down) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - analytic[i]) / std::max(1.0, std::abs(fd) + std::abs(analytic[i])));
  }
  return worst;
}

inline CheckResult check_sac_gradients(int trials = 10, std::uint64_t seed = 6) {
  CheckResult r;
  r.name = "sac.loss_gradients";
  r.threshold = 1e-4;
  Stopwatch sw;
  std::mt19937_64 rng(seed);
  for (int t = 0; t < trials; ++t) {
    sac::SacConfig cfg = small_sac_config();
    cfg.alpha = 0.05 + 0.3 * (t % 3);
    sac::SacAgent agent(cfg, seed * 100 + t);
    const sac::Batch b = random_batch(cfg.obs_dim, cfg.act_dim, cfg.batch_size, rng);
    const Eigen::MatrixXd next_noise = nn::standard_normal(cfg.act_dim, cfg.batch_size, rng);
    const Eigen::MatrixXd noise = nn::standard_normal(cfg.act_dim, cfg.batch_size, rng);

    const sac::CriticLoss cl = agent.critic_loss(b, next_noise);
    for (int i = 0; i < 2; ++i) {
      const double err = gradient_check(agent.critic(i).params(), cl.grad[i],
                                        [&] { return agent.critic_loss(b, next_noise).loss; }, 40, rng);
      r.record(err < r.threshold, err, [&] {
        return "critic " + std::to_string(i + 1) + " trial " + std::to_string(t) + " error " + std::to_string(err);
      });
    }
    const sac::ActorLoss al = agent.actor_loss(b, noise);
    const double err = gradient_check(agent.actor().params(), al.grad,
                                      [&] { return agent.actor_loss(b, noise).loss; }, 40, rng);
    r.record(err < r.threshold, err, [&] {
      return "actor trial " + std::to_string(t) + " error " + std::to_string(err);
    });
  }
  r.seconds = sw.seconds();
  return r;
}

inline CheckResult check_sac_bandit(int updates = 5000, std::uint64_t seed = 0) {
  CheckResult r;
  r.name = "sac.bandit_convergence";
  r.threshold = 0.05;
  Stopwatch sw;
  sac::SacConfig cfg;
  cfg.actor_hidden = {32, 32};
  cfg.critic_hidden = {32, 32};
  const double err = toy::train_bandit(toy::Bandit{}, cfg, updates, seed);
  r.record(err < r.threshold, err, [&] { return "|tanh(mu) - optimum| = " + std::to_string(err); });
  r.seconds = sw.seconds();
  return r;
}

struct ReacherCheck {
  CheckResult result;
  std::vector<toy::ReacherResult> runs;
};

/// Success rate of the training rollouts over the last 20 of 200 episodes, per seed.
inline ReacherCheck check_sac_reacher(const std::vector<std::uint64_t>& seeds = {0, 1, 2}) {
  ReacherCheck out;
  CheckResult& r = out.result;
  r.name = "sac.planar_reacher";
  r.threshold = 0.9;
  r.time_limit = 600.0;
  Stopwatch sw;
  sac::SacConfig cfg;
  cfg.actor_hidden = {64, 64};
  cfg.critic_hidden = {64, 64};
  cfg.gamma = 0.9;
  cfg.alpha = 0.05;
  for (std::uint64_t s : seeds) {
    const toy::ReacherResult res = toy::train_reacher(cfg, 200, 100, s, 4);
    out.runs.push_back(res);
    const double shortfall = std::max(0.0, r.threshold - res.train_success_rate_last20);
    r.record(res.train_success_rate_last20 >= r.threshold, shortfall, [&] {
      return "seed " + std::to_string(s) + " success " + std::to_string(res.train_success_rate_last20);
    });
  }
  r.seconds = sw.seconds();
  return out;
}

}  // namespace orbitarm::verify

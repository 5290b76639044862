#include <orbitarm/env.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <vector>

using namespace orbitarm;

TEST(Env, ResetIsDeterministicPerSeed) {
  Env a, b;
  const Observation oa = a.reset(17);
  const Observation ob = b.reset(17);
  EXPECT_EQ(oa, ob);
  EXPECT_EQ(a.target().yaw, b.target().yaw);
  const Action act = Action::Constant(0.3);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(a.step(act).observation, b.step(act).observation);
  Env c;
  c.reset(18);
  EXPECT_NE(c.target().yaw, a.target().yaw);
}

TEST(Env, YawIsUniformOverRange) {
  // One-sample Kolmogorov-Smirnov test against U[-range, range] at alpha = 0.001.
  Env env;
  const double range = env.config().yaw_range;
  const int n = 2000;
  std::vector<double> u;
  for (int i = 0; i < n; ++i) {
    env.reset(static_cast<std::uint64_t>(i) * 7919u + 1u);
    const double y = env.target().yaw;
    ASSERT_LE(std::abs(y), range);
    u.push_back((y + range) / (2 * range));
  }
  std::sort(u.begin(), u.end());
  double d = 0.0;
  for (int i = 0; i < n; ++i) d = std::max({d, (i + 1.0) / n - u[i], u[i] - double(i) / n});
  EXPECT_LT(d, 1.949 / std::sqrt(double(n)));
}

TEST(Env, ExplicitYawAndFixedYaw) {
  Env env;
  env.reset(3, EnvMode::kTrain, 0.25);
  EXPECT_DOUBLE_EQ(env.target().yaw, 0.25);
  EnvConfig cfg;
  cfg.randomize_yaw = false;
  cfg.target.yaw = -0.49345;
  Env fixed(cfg);
  fixed.reset(99);
  EXPECT_DOUBLE_EQ(fixed.target().yaw, -0.49345);
}

TEST(Env, ObservationLayout) {
  Env env;
  const Observation o = env.reset(5);
  const auto& s = env.state();
  const auto& e = env.errors();
  for (int j = 0; j < kArmDof; ++j) {
    EXPECT_DOUBLE_EQ(o[j], wrap_angle(s.q[0][j]));
    EXPECT_DOUBLE_EQ(o[6 + j], wrap_angle(s.q[1][j]));
    EXPECT_DOUBLE_EQ(o[12 + j], 0.0);  // joint rates at rest
  }
  for (int a = 0; a < kNumArms; ++a) {
    for (int k = 0; k < 3; ++k) {
      EXPECT_DOUBLE_EQ(o[24 + 6 * a + k], e.end_effector[a].position[k]);
      EXPECT_DOUBLE_EQ(o[36 + 6 * a + k], e.target[a].position[k]);
      EXPECT_DOUBLE_EQ(o[48 + 3 * a + k], e.position[a][k]);
      EXPECT_DOUBLE_EQ(o[54 + 3 * a + k], e.orientation[a].value[k]);
    }
    EXPECT_NEAR((e.target[a].position - e.end_effector[a].position - e.position[a]).norm(), 0.0, 1e-15);
    EXPECT_EQ(e.target[a].position, env.target().grasp_pose(a).position);
  }
  EXPECT_EQ(o.size(), kObsDim);
}

TEST(Env, TimeoutEndsEpisodeAndStepAfterDoneThrows) {
  EnvConfig cfg;
  cfg.episode_length = 7;
  Env env(cfg);
  EXPECT_THROW(env.step(Action::Zero()), std::logic_error);  // never reset
  env.reset(1);
  StepResult r;
  for (int i = 0; i < 7; ++i) {
    ASSERT_FALSE(env.done());
    r = env.step(Action::Zero());
  }
  EXPECT_TRUE(r.done);
  EXPECT_TRUE(r.info.timeout);
  EXPECT_EQ(env.step_count(), 7);
  EXPECT_THROW(env.step(Action::Zero()), std::logic_error);
}

TEST(Env, ActionsAreClippedAndScaled) {
  EnvConfig cfg;
  Env a(cfg), b(cfg);
  a.reset(2);
  b.reset(2);
  Action big = Action::Constant(5.0);
  const StepResult ra = a.step(big);
  const StepResult rb = b.step(Action::Ones());
  EXPECT_EQ(ra.observation, rb.observation);
  EXPECT_NEAR(a.state().qd[0][0], cfg.max_joint_velocity, 1e-15);
}

TEST(Env, SpinOnlyInEvalMode) {
  EnvConfig cfg;
  cfg.eval_spin_rate = 0.06;
  Env env(cfg);
  env.reset(4, EnvMode::kTrain, 0.0);
  env.step(Action::Zero());
  EXPECT_DOUBLE_EQ(env.target().yaw, 0.0);
  env.reset(4, EnvMode::kEval, 0.0);
  for (int i = 0; i < 10; ++i) env.step(Action::Zero());
  EXPECT_NEAR(env.target().yaw, 10 * 0.06 * cfg.integrator.dt, 1e-12);
}

TEST(Env, RewardMatchesBreakdown) {
  Env env;
  env.reset(8);
  const StepResult r = env.step(env.prior_action());
  EXPECT_FALSE(r.info.collision);
  EXPECT_DOUBLE_EQ(r.reward, r.info.reward.total);
  EXPECT_GT(r.reward, 0.0);
}

TEST(Env, InvalidConfigRejected) {
  EnvConfig cfg;
  cfg.geometry.link_radius[0] = 0.0;
  EXPECT_THROW(Env{cfg}, std::invalid_argument);
  EnvConfig bad;
  bad.reward.w1 = 0.9;
  EXPECT_THROW(Env{bad}, std::invalid_argument);
}

#pragma once
// Small environments with known solutions, used to check the SAC learner.

#include <orbitarm/sac.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace orbitarm::toy {

using Eigen::VectorXd;

/// One-step bandit: constant observation, reward -(a - optimum)^2, always terminal.
struct Bandit {
  double optimum = 0.5;
  VectorXd observation() const { return VectorXd::Ones(1); }
  double reward(const VectorXd& a) const { return -(a[0] - optimum) * (a[0] - optimum); }
};

/// Trains a fresh agent on the bandit for `updates` iterations, one new sample per update.
/// Returns |tanh(mu) - optimum| at the end.
inline double train_bandit(const Bandit& bandit, sac::SacConfig cfg, int updates, std::uint64_t seed) {
  cfg.obs_dim = 1;
  cfg.act_dim = 1;
  sac::SacAgent agent(cfg, seed);
  sac::ReplayBuffer buffer(1, 1, cfg.buffer_capacity);
  const VectorXd s = bandit.observation();
  auto collect = [&] {
    const VectorXd a = agent.sample_action(s);
    buffer.add({s, a, bandit.reward(a), s, true});
  };
  for (int i = 0; i < cfg.batch_size; ++i) collect();
  for (int i = 0; i < updates; ++i) {
    collect();
    agent.update(buffer, 1);
  }
  return std::abs(agent.deterministic_action(s)[0] - bandit.optimum);
}

/// Planar two-link arm reaching a random point. Actions are joint increments
/// of up to `max_step` rad; success ends the episode.
class PlanarReacher {
 public:
  static constexpr int kObsDim = 8;
  static constexpr int kActDim = 2;

  double link1 = 0.5;
  double link2 = 0.5;
  double max_step = 0.2;
  double success_radius = 0.05;
  int max_steps = 50;
  double error_scale = 20.0;  // tip error is observed in units of 1/error_scale m

  VectorXd reset(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    std::uniform_real_distribution<double> radius(0.2, 0.95);
    q_ = Eigen::Vector2d(angle(rng), angle(rng));
    const double r = radius(rng), t = angle(rng);
    target_ = Eigen::Vector2d(r * std::cos(t), r * std::sin(t));
    steps_ = 0;
    return observation();
  }

  struct Step {
    VectorXd observation;
    double reward = 0.0;
    bool done = false;
    bool success = false;
  };

  Step step(const VectorXd& action) {
    q_ += max_step * action.cwiseMax(-1.0).cwiseMin(1.0);
    ++steps_;
    Step s;
    const double d = distance();
    s.success = d <= success_radius;
    s.reward = s.success ? 1.0 : -d;
    s.done = s.success || steps_ >= max_steps;
    s.observation = observation();
    return s;
  }

  Eigen::Vector2d tip() const {
    return {link1 * std::cos(q_[0]) + link2 * std::cos(q_[0] + q_[1]),
            link1 * std::sin(q_[0]) + link2 * std::sin(q_[0] + q_[1])};
  }
  double distance() const { return (tip() - target_).norm(); }

  VectorXd observation() const {
    VectorXd o(kObsDim);
    const Eigen::Vector2d p = tip();
    o << std::cos(q_[0]), std::sin(q_[0]), std::cos(q_[1]), std::sin(q_[1]), target_, error_scale * (p - target_);
    return o;
  }

 private:
  Eigen::Vector2d q_ = Eigen::Vector2d::Zero();
  Eigen::Vector2d target_ = Eigen::Vector2d::Zero();
  int steps_ = 0;
};

struct ReacherResult {
  int train_episodes = 0;
  double train_success_rate_last20 = 0.0;
  double eval_success_rate = 0.0;  // deterministic policy on fresh targets
};

/// SAC on the reacher: `updates_per_step` updates per env step once the buffer holds a batch.
inline ReacherResult train_reacher(sac::SacConfig cfg, int episodes, int eval_episodes, std::uint64_t seed,
                                   int updates_per_step = 1, PlanarReacher env = {}) {
  cfg.obs_dim = PlanarReacher::kObsDim;
  cfg.act_dim = PlanarReacher::kActDim;
  sac::SacAgent agent(cfg, seed);
  sac::ReplayBuffer buffer(cfg.obs_dim, cfg.act_dim, cfg.buffer_capacity);
  std::mt19937_64 rng(seed ^ 0x5eedULL);
  ReacherResult out;
  int recent = 0;
  for (int ep = 0; ep < episodes; ++ep) {
    VectorXd s = env.reset(rng);
    bool success = false;
    for (bool done = false; !done;) {
      const VectorXd a = agent.sample_action(s);
      const auto r = env.step(a);
      // Only reaching the target is terminal; running out of steps bootstraps.
      buffer.add({s, a, r.reward, r.observation, r.success});
      s = r.observation;
      done = r.done;
      success = success || r.success;
      if (buffer.size() >= static_cast<std::size_t>(cfg.batch_size)) agent.update(buffer, updates_per_step);
    }
    if (ep >= episodes - 20 && success) ++recent;
  }
  out.train_episodes = episodes;
  out.train_success_rate_last20 = recent / 20.0;
  std::mt19937_64 eval_rng(seed ^ 0xe7a1ULL);
  int ok = 0;
  for (int ep = 0; ep < eval_episodes; ++ep) {
    VectorXd s = env.reset(eval_rng);
    for (bool done = false; !done;) {
      const auto r = env.step(agent.deterministic_action(s));
      s = r.observation;
      done = r.done;
      if (r.success) ++ok;
    }
  }
  out.eval_success_rate = static_cast<double>(ok) / eval_episodes;
  return out;
}

}  // namespace orbitarm::toy

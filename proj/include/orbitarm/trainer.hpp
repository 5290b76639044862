#pragma once
// Mixed-policy training loop: each executed action blends the learner's sample
// with the prior's IK step, the learner's own sample is what gets stored, and
// a fixed number of SAC updates follows every episode.

#include <orbitarm/env.hpp>
#include <orbitarm/sac.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace orbitarm {

struct MixedPolicyConfig {
  double w = 0.5;  // weight of the learned action
  // Optional linear schedule from w_start to w_end over the run.
  bool ramp = false;
  double w_start = 0.3;
  double w_end = 1.0;

  void validate() const {
    for (double v : {w, w_start, w_end})
      if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("mixing weight must lie in [0, 1]");
  }

  /// Weight for a given epoch of `epochs`.
  double weight(int epoch, int epochs) const {
    if (!ramp) return w;
    if (epochs <= 1) return w_end;
    const double t = static_cast<double>(epoch) / static_cast<double>(epochs - 1);
    return w_start + (w_end - w_start) * t;
  }
};

/// w * learned + (1 - w) * prior.
template <typename Derived1, typename Derived2>
auto mixed_action(const Eigen::MatrixBase<Derived1>& learned, const Eigen::MatrixBase<Derived2>& prior,
                  double w) {
  if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("mixing weight must lie in [0, 1]");
  if (learned.size() != prior.size()) throw std::invalid_argument("mixed_action: size mismatch");
  using Out = Eigen::Matrix<typename Derived1::Scalar, Derived1::RowsAtCompileTime, 1>;
  Out out = w * learned.derived() + (1.0 - w) * prior.derived();
  return out;
}

struct TrainConfig {
  int epochs = 100;
  int episodes_per_epoch = 5;
  int updates_per_episode = -1;  // < 0: one update per collected env step
  MixedPolicyConfig mix;
  std::uint64_t seed = 0;
  bool store_learned_action = true;  // false stores the executed (mixed) action instead

  void validate() const {
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (episodes_per_epoch < 1) throw std::invalid_argument("episodes_per_epoch must be >= 1");
    mix.validate();
  }
};

struct EpisodeRecord {
  int epoch = 0;
  int episode = 0;  // global index
  int steps = 0;
  double total_reward = 0.0;
  double w = 0.0;
  bool success = false;  // success condition met on any step
  bool collision = false;
  bool joint_limit = false;
  double final_position_error = 0.0;  // mean over arms at the last step
  double final_orientation_error = 0.0;
  double target_yaw = 0.0;
};

struct EpochMetrics {
  int epoch = 0;
  int last_episode = 0;
  double mean_reward = 0.0;  // mean episode return
  double success_rate = 0.0;
  double mean_final_position_error = 0.0;
  double critic_loss = std::numeric_limits<double>::quiet_NaN();
  double actor_loss = std::numeric_limits<double>::quiet_NaN();
  double alpha = 0.0;
  double w = 0.0;
  long env_steps = 0;
  long updates = 0;
};

struct TrainResult {
  std::vector<EpochMetrics> epochs;
  std::vector<EpisodeRecord> episodes;
};

/// Seed of the env reset for a global episode index.
inline std::uint64_t episode_seed(std::uint64_t seed, int episode) {
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(episode) + 1;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// One episode of the mixed policy. Transitions go to `buffer` when non-null.
inline EpisodeRecord run_mixed_episode(Env& env, sac::SacAgent& agent, double w, std::uint64_t reset_seed,
                                       sac::ReplayBuffer* buffer, bool store_learned = true) {
  EpisodeRecord rec;
  rec.w = w;
  Observation obs = env.reset(reset_seed, EnvMode::kTrain);
  rec.target_yaw = env.target().yaw;
  while (!env.done()) {
    const Action prior = env.prior_action();
    const Action learned = agent.sample_action(obs);
    const Action executed = mixed_action(learned, prior, w);
    const StepResult r = env.step(executed);
    if (buffer) {
      sac::Transition t;
      t.state = obs;
      t.action = store_learned ? learned : executed;
      t.reward = r.reward;
      t.next_state = r.observation;
      t.terminal = r.info.collision || r.info.joint_limit;
      buffer->add(t);
    }
    rec.total_reward += r.reward;
    rec.success = rec.success || r.info.success;
    rec.collision = r.info.collision;
    rec.joint_limit = r.info.joint_limit;
    ++rec.steps;
    obs = r.observation;
  }
  const auto d = env.errors().distance();
  rec.final_position_error = 0.5 * (d[0] + d[1]);
  rec.final_orientation_error =
      0.5 * (env.errors().orientation[0].max_abs() + env.errors().orientation[1].max_abs());
  return rec;
}

using EpochCallback = std::function<void(const EpochMetrics&)>;

/// Runs the configured budget. Throws std::runtime_error on a non-finite loss.
inline TrainResult train(const TrainConfig& cfg, Env& env, sac::SacAgent& agent,
                         const EpochCallback& on_epoch = {}) {
  cfg.validate();
  const sac::SacConfig& sc = agent.config();
  if (sc.obs_dim != kObsDim || sc.act_dim != kActionDim)
    throw std::invalid_argument("agent dimensions do not match the environment");
  sac::ReplayBuffer buffer(sc.obs_dim, sc.act_dim, sc.buffer_capacity);
  TrainResult result;
  int episode = 0;
  long total_steps = 0;
  long total_updates = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double w = cfg.mix.weight(epoch, cfg.epochs);
    EpochMetrics m;
    m.epoch = epoch;
    m.w = w;
    double critic_sum = 0.0, actor_sum = 0.0;
    int loss_count = 0;
    double final_err = 0.0;
    int successes = 0;
    for (int e = 0; e < cfg.episodes_per_epoch; ++e, ++episode) {
      EpisodeRecord rec = run_mixed_episode(env, agent, w, episode_seed(cfg.seed, episode), &buffer,
                                            cfg.store_learned_action);
      rec.epoch = epoch;
      rec.episode = episode;
      total_steps += rec.steps;
      m.mean_reward += rec.total_reward;
      final_err += rec.final_position_error;
      successes += rec.success ? 1 : 0;

      const int n = cfg.updates_per_episode < 0 ? rec.steps : cfg.updates_per_episode;
      if (n > 0 && buffer.size() >= static_cast<std::size_t>(sc.batch_size)) {
        sac::UpdateMetrics um;
        try {
          um = agent.update(buffer, n);
        } catch (const std::runtime_error& err) {
          throw std::runtime_error("epoch " + std::to_string(epoch) + ", episode " +
                                   std::to_string(episode) + ": " + err.what());
        }
        critic_sum += um.critic_loss;
        actor_sum += um.actor_loss;
        ++loss_count;
        total_updates += n;
      }
      result.episodes.push_back(rec);
    }
    const double k = cfg.episodes_per_epoch;
    m.last_episode = episode - 1;
    m.mean_reward /= k;
    m.success_rate = successes / k;
    m.mean_final_position_error = final_err / k;
    if (loss_count > 0) {
      m.critic_loss = critic_sum / loss_count;
      m.actor_loss = actor_sum / loss_count;
    }
    m.alpha = agent.alpha();
    m.env_steps = total_steps;
    m.updates = total_updates;
    result.epochs.push_back(m);
    if (on_epoch) on_epoch(m);
  }
  return result;
}

/// Mean of mean_reward over the last `k` epochs.
inline double final_mean_reward(const TrainResult& r, int k) {
  if (r.epochs.empty()) throw std::invalid_argument("no epochs recorded");
  const int n = std::min<int>(k, static_cast<int>(r.epochs.size()));
  double s = 0.0;
  for (int i = static_cast<int>(r.epochs.size()) - n; i < static_cast<int>(r.epochs.size()); ++i)
    s += r.epochs[i].mean_reward;
  return s / n;
}

}  // namespace orbitarm

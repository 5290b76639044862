#pragma once
// Soft actor-critic: replay buffer, twin critics with polyak-averaged targets,
// clipped double-Q soft Bellman targets and the reparameterized actor loss.

#include <orbitarm/nn.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace orbitarm::sac {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using nn::Mlp;

struct Transition {
  VectorXd state;
  VectorXd action;
  double reward = 0.0;
  VectorXd next_state;
  bool terminal = false;  // no bootstrapping from next_state
};

struct Batch {
  MatrixXd states;       // obs_dim x n
  MatrixXd actions;      // act_dim x n
  VectorXd rewards;
  MatrixXd next_states;
  VectorXd terminals;    // 1.0 = terminal
  Eigen::Index size() const { return rewards.size(); }
};

/// Fixed-capacity FIFO ring buffer with uniform sampling.
class ReplayBuffer {
 public:
  ReplayBuffer(int obs_dim, int act_dim, std::size_t capacity)
      : obs_dim_(obs_dim), act_dim_(act_dim), capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay buffer capacity must be positive");
  }

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  int obs_dim() const { return obs_dim_; }
  int act_dim() const { return act_dim_; }

  void add(const Transition& t) {
    if (t.state.size() != obs_dim_ || t.next_state.size() != obs_dim_ || t.action.size() != act_dim_)
      throw std::invalid_argument("transition shape does not match replay buffer");
    if (!t.state.allFinite() || !t.next_state.allFinite() || !t.action.allFinite() ||
        !std::isfinite(t.reward))
      throw std::invalid_argument("transition contains non-finite entries");
    const std::size_t slot = size_ < capacity_ ? size_ : head_;
    if (size_ < capacity_) {
      states_.resize((size_ + 1) * obs_dim_);
      next_states_.resize((size_ + 1) * obs_dim_);
      actions_.resize((size_ + 1) * act_dim_);
      rewards_.push_back(0.0);
      terminals_.push_back(0.0);
      ++size_;
    } else {
      head_ = (head_ + 1) % capacity_;
    }
    std::copy(t.state.data(), t.state.data() + obs_dim_, states_.begin() + slot * obs_dim_);
    std::copy(t.next_state.data(), t.next_state.data() + obs_dim_,
              next_states_.begin() + slot * obs_dim_);
    std::copy(t.action.data(), t.action.data() + act_dim_, actions_.begin() + slot * act_dim_);
    rewards_[slot] = t.reward;
    terminals_[slot] = t.terminal ? 1.0 : 0.0;
  }

  /// i-th oldest stored transition.
  Transition at(std::size_t i) const {
    if (i >= size_) throw std::out_of_range("replay buffer index out of range");
    const std::size_t slot = (head_ + i) % capacity_;
    Transition t;
    t.state = Eigen::Map<const VectorXd>(states_.data() + slot * obs_dim_, obs_dim_);
    t.next_state = Eigen::Map<const VectorXd>(next_states_.data() + slot * obs_dim_, obs_dim_);
    t.action = Eigen::Map<const VectorXd>(actions_.data() + slot * act_dim_, act_dim_);
    t.reward = rewards_[slot];
    t.terminal = terminals_[slot] != 0.0;
    return t;
  }

  Batch sample(int n, std::mt19937_64& rng) const {
    // Draws with replacement, so n may exceed the number of stored transitions.
    if (n <= 0) throw std::invalid_argument("sample size must be positive");
    if (size_ == 0) throw std::invalid_argument("cannot sample from an empty replay buffer");
    std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
    Batch b;
    b.states.resize(obs_dim_, n);
    b.next_states.resize(obs_dim_, n);
    b.actions.resize(act_dim_, n);
    b.rewards.resize(n);
    b.terminals.resize(n);
    for (int j = 0; j < n; ++j) {
      const std::size_t k = pick(rng);
      b.states.col(j) = Eigen::Map<const VectorXd>(states_.data() + k * obs_dim_, obs_dim_);
      b.next_states.col(j) = Eigen::Map<const VectorXd>(next_states_.data() + k * obs_dim_, obs_dim_);
      b.actions.col(j) = Eigen::Map<const VectorXd>(actions_.data() + k * act_dim_, act_dim_);
      b.rewards[j] = rewards_[k];
      b.terminals[j] = terminals_[k];
    }
    return b;
  }

 private:
  int obs_dim_;
  int act_dim_;
  std::size_t capacity_;
  std::size_t size_ = 0;
  std::size_t head_ = 0;  // oldest slot once full
  std::vector<double> states_, next_states_, actions_, rewards_, terminals_;
};

struct SacConfig {
  int obs_dim = 60;
  int act_dim = 12;
  std::vector<int> actor_hidden{256, 256};
  std::vector<int> critic_hidden{256, 256};
  double actor_lr = 1e-3;
  double critic_lr = 5e-4;
  double gamma = 0.995;
  double polyak = 0.995;
  int batch_size = 128;
  std::size_t buffer_capacity = 1'000'000;
  double alpha = 0.2;
  bool auto_alpha = false;
  double target_entropy = -12.0;
  double alpha_lr = 3e-4;
};

struct CriticLoss {
  double loss = 0.0;
  VectorXd grad[2];
  VectorXd target;   // y per sample
  VectorXd q[2];
};

struct ActorLoss {
  double loss = 0.0;
  VectorXd grad;
  double mean_log_prob = 0.0;
};

struct UpdateMetrics {
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double mean_q = 0.0;
  double alpha = 0.0;
  double entropy = 0.0;
};

inline MatrixXd stack(const MatrixXd& top, const MatrixXd& bottom) {
  MatrixXd out(top.rows() + bottom.rows(), top.cols());
  out << top, bottom;
  return out;
}

class SacAgent {
 public:
  SacAgent(SacConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)), rng_(seed) {
    std::vector<int> actor_sizes{cfg_.obs_dim};
    actor_sizes.insert(actor_sizes.end(), cfg_.actor_hidden.begin(), cfg_.actor_hidden.end());
    actor_sizes.push_back(2 * cfg_.act_dim);
    std::vector<int> critic_sizes{cfg_.obs_dim + cfg_.act_dim};
    critic_sizes.insert(critic_sizes.end(), cfg_.critic_hidden.begin(), cfg_.critic_hidden.end());
    critic_sizes.push_back(1);
    actor_ = Mlp(actor_sizes, rng_);
    for (int i = 0; i < 2; ++i) {
      critic_[i] = Mlp(critic_sizes, rng_);
      target_[i] = critic_[i];
      critic_opt_[i] = nn::make_adam_state(critic_[i].parameter_count());
    }
    actor_opt_ = nn::make_adam_state(actor_.parameter_count());
    log_alpha_ = std::log(cfg_.alpha);
    alpha_opt_ = nn::make_adam_state(1);
  }

  const SacConfig& config() const { return cfg_; }
  double alpha() const { return std::exp(log_alpha_); }
  double log_alpha() const { return log_alpha_; }
  void set_log_alpha(double v) { log_alpha_ = v; }

  Mlp& actor() { return actor_; }
  const Mlp& actor() const { return actor_; }
  Mlp& critic(int i) { return critic_[i]; }
  const Mlp& critic(int i) const { return critic_[i]; }
  Mlp& target(int i) { return target_[i]; }
  const Mlp& target(int i) const { return target_[i]; }
  nn::AdamState& actor_optimizer() { return actor_opt_; }
  nn::AdamState& critic_optimizer(int i) { return critic_opt_[i]; }
  nn::AdamState& alpha_optimizer() { return alpha_opt_; }
  std::mt19937_64& rng() { return rng_; }

  /// Stochastic action for a single observation.
  VectorXd sample_action(const VectorXd& obs) {
    return nn::sample_action(actor_, obs, rng_).action.col(0);
  }
  VectorXd deterministic_action(const VectorXd& obs) const {
    return nn::deterministic_action(actor_, obs).col(0);
  }

  /// Clipped double-Q soft Bellman target for each sample; a' uses next_noise.
  VectorXd bellman_target(const Batch& b, const MatrixXd& next_noise) const {
    const nn::GaussianPolicyOutput next =
        nn::squash_gaussian(actor_.predict(b.next_states), next_noise);
    const MatrixXd sa = stack(b.next_states, next.action);
    const VectorXd q1 = target_[0].predict(sa).row(0).transpose();
    const VectorXd q2 = target_[1].predict(sa).row(0).transpose();
    const VectorXd soft = q1.cwiseMin(q2) - alpha() * next.log_prob;
    return b.rewards.array() + cfg_.gamma * (1.0 - b.terminals.array()) * soft.array();
  }

  /// sum_i mean_b 1/2 (Q_i(s, a) - y)^2 and its gradients; y is held constant.
  CriticLoss critic_loss(const Batch& b, const MatrixXd& next_noise) const {
    CriticLoss out;
    out.target = bellman_target(b, next_noise);
    const MatrixXd sa = stack(b.states, b.actions);
    const double n = static_cast<double>(b.size());
    for (int i = 0; i < 2; ++i) {
      nn::ForwardCache cache;
      out.q[i] = critic_[i].forward(sa, cache).row(0).transpose();
      const VectorXd diff = out.q[i] - out.target;
      out.loss += 0.5 * diff.squaredNorm() / n;
      out.grad[i] = critic_[i].backward(cache, diff.transpose() / n).params;
    }
    return out;
  }

  /// mean_b [alpha log pi(a|s) - min_i Q_i(s, a)], a = tanh(mu + sigma * noise).
  ActorLoss actor_loss(const Batch& b, const MatrixXd& noise) const {
    const double n = static_cast<double>(b.size());
    nn::ForwardCache actor_cache;
    const MatrixXd raw = actor_.forward(b.states, actor_cache);
    const nn::GaussianPolicyOutput pi = nn::squash_gaussian(raw, noise);
    const MatrixXd sa = stack(b.states, pi.action);
    nn::ForwardCache qc[2];
    const VectorXd q1 = critic_[0].forward(sa, qc[0]).row(0).transpose();
    const VectorXd q2 = critic_[1].forward(sa, qc[1]).row(0).transpose();

    MatrixXd g1 = MatrixXd::Zero(1, b.size());
    MatrixXd g2 = MatrixXd::Zero(1, b.size());
    VectorXd qmin(b.size());
    for (Eigen::Index j = 0; j < b.size(); ++j) {
      // Ties take the first critic.
      if (q1[j] <= q2[j]) {
        qmin[j] = q1[j];
        g1(0, j) = -1.0 / n;
      } else {
        qmin[j] = q2[j];
        g2(0, j) = -1.0 / n;
      }
    }
    const MatrixXd da = critic_[0].backward(qc[0], g1).input.bottomRows(cfg_.act_dim) +
                        critic_[1].backward(qc[1], g2).input.bottomRows(cfg_.act_dim);
    const MatrixXd grad_raw = nn::squash_gaussian_backward(pi, da, alpha() / n);

    ActorLoss out;
    out.loss = (alpha() * pi.log_prob - qmin).mean();
    out.mean_log_prob = pi.log_prob.mean();
    out.grad = actor_.backward(actor_cache, grad_raw).params;
    return out;
  }

  /// target <- polyak * target + (1 - polyak) * online.
  void soft_update() {
    for (int i = 0; i < 2; ++i)
      target_[i].params() = cfg_.polyak * target_[i].params() + (1.0 - cfg_.polyak) * critic_[i].params();
  }

  UpdateMetrics update_on(const Batch& b) {
    UpdateMetrics m;
    const MatrixXd next_noise = nn::standard_normal(cfg_.act_dim, b.size(), rng_);
    const CriticLoss cl = critic_loss(b, next_noise);
    for (int i = 0; i < 2; ++i)
      nn::adam_step(critic_[i].params(), cl.grad[i], cfg_.critic_lr, critic_opt_[i]);

    const MatrixXd noise = nn::standard_normal(cfg_.act_dim, b.size(), rng_);
    const ActorLoss al = actor_loss(b, noise);
    nn::adam_step(actor_.params(), al.grad, cfg_.actor_lr, actor_opt_);

    if (cfg_.auto_alpha) {
      VectorXd la = VectorXd::Constant(1, log_alpha_);
      const VectorXd g = VectorXd::Constant(1, -(al.mean_log_prob + cfg_.target_entropy));
      nn::adam_step(la, g, cfg_.alpha_lr, alpha_opt_);
      log_alpha_ = la[0];
    }
    soft_update();

    m.critic_loss = cl.loss;
    m.actor_loss = al.loss;
    m.mean_q = 0.5 * (cl.q[0].mean() + cl.q[1].mean());
    m.alpha = alpha();
    m.entropy = -al.mean_log_prob;
    return m;
  }

  /// n_iterations of sample / critic step / actor step / target update; returns mean metrics.
  UpdateMetrics update(const ReplayBuffer& buffer, int n_iterations) {
    if (buffer.size() < static_cast<std::size_t>(cfg_.batch_size))
      throw std::invalid_argument("replay buffer holds fewer transitions than the batch size");
    UpdateMetrics sum;
    for (int it = 0; it < n_iterations; ++it) {
      const UpdateMetrics m = update_on(buffer.sample(cfg_.batch_size, rng_));
      if (!std::isfinite(m.critic_loss) || !std::isfinite(m.actor_loss))
        throw std::runtime_error("non-finite loss during SAC update (critic " +
                                 std::to_string(m.critic_loss) + ", actor " +
                                 std::to_string(m.actor_loss) + ")");
      sum.critic_loss += m.critic_loss;
      sum.actor_loss += m.actor_loss;
      sum.mean_q += m.mean_q;
      sum.entropy += m.entropy;
    }
    if (n_iterations > 0) {
      sum.critic_loss /= n_iterations;
      sum.actor_loss /= n_iterations;
      sum.mean_q /= n_iterations;
      sum.entropy /= n_iterations;
    }
    sum.alpha = alpha();
    return sum;
  }

 private:
  SacConfig cfg_;
  std::mt19937_64 rng_;
  Mlp actor_;
  Mlp critic_[2];
  Mlp target_[2];
  nn::AdamState actor_opt_;
  nn::AdamState critic_opt_[2];
  double log_alpha_ = 0.0;
  nn::AdamState alpha_opt_;
};

}  // namespace orbitarm::sac

#pragma once
// Fully connected ReLU networks with exact reverse-mode gradients, Adam, and a
// tanh-squashed diagonal Gaussian policy head. Samples are stored column-wise.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace orbitarm::nn {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Intermediate values of one forward pass; consumed by Mlp::backward.
struct ForwardCache {
  std::vector<MatrixXd> inputs;        // input to each layer
  std::vector<MatrixXd> preactivations;  // hidden layers only
  bool valid() const { return !inputs.empty(); }
};

struct Gradients {
  VectorXd params;  // same layout as Mlp::params()
  MatrixXd input;   // d loss / d input
};

class Mlp {
 public:
  Mlp() = default;

  /// sizes = {input, hidden..., output}. Weights and biases ~ U(+-1/sqrt(fan_in)).
  Mlp(std::vector<int> sizes, std::mt19937_64& rng) : Mlp(std::move(sizes)) {
    for (int l = 0; l < num_layers(); ++l) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(sizes_[l]));
      std::uniform_real_distribution<double> dist(-bound, bound);
      auto w = weight(l);
      for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
      auto b = bias(l);
      for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = dist(rng);
    }
  }

  /// Zero-initialized network of the given shape.
  explicit Mlp(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.size() < 2) throw std::invalid_argument("Mlp needs at least input and output sizes");
    for (int s : sizes_)
      if (s <= 0) throw std::invalid_argument("Mlp layer sizes must be positive");
    Eigen::Index total = 0;
    for (int l = 0; l < num_layers(); ++l) {
      weight_offset_.push_back(total);
      total += static_cast<Eigen::Index>(sizes_[l + 1]) * sizes_[l];
      bias_offset_.push_back(total);
      total += sizes_[l + 1];
    }
    params_ = VectorXd::Zero(total);
  }

  const std::vector<int>& sizes() const { return sizes_; }
  int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  Eigen::Index parameter_count() const { return params_.size(); }

  VectorXd& params() { return params_; }
  const VectorXd& params() const { return params_; }

  Eigen::Map<MatrixXd> weight(int l) {
    return {params_.data() + weight_offset_[l], sizes_[l + 1], sizes_[l]};
  }
  Eigen::Map<const MatrixXd> weight(int l) const {
    return {params_.data() + weight_offset_[l], sizes_[l + 1], sizes_[l]};
  }
  Eigen::Map<VectorXd> bias(int l) { return {params_.data() + bias_offset_[l], sizes_[l + 1]}; }
  Eigen::Map<const VectorXd> bias(int l) const {
    return {params_.data() + bias_offset_[l], sizes_[l + 1]};
  }

  MatrixXd forward(const MatrixXd& x, ForwardCache& cache) const {
    check_input(x);
    cache.inputs.assign(1, x);
    cache.preactivations.clear();
    MatrixXd a = x;
    for (int l = 0; l < num_layers(); ++l) {
      MatrixXd z = weight(l) * a;
      z.colwise() += bias(l);
      if (l + 1 == num_layers()) return z;
      a = z.cwiseMax(0.0);
      cache.preactivations.push_back(std::move(z));
      cache.inputs.push_back(a);
    }
    return a;
  }

  MatrixXd predict(const MatrixXd& x) const {
    check_input(x);
    MatrixXd a = x;
    for (int l = 0; l < num_layers(); ++l) {
      MatrixXd z = weight(l) * a;
      z.colwise() += bias(l);
      a = (l + 1 == num_layers()) ? std::move(z) : MatrixXd(z.cwiseMax(0.0));
    }
    return a;
  }

  /// Parameter and input gradients of sum(grad_out .* output).
  Gradients backward(const ForwardCache& cache, const MatrixXd& grad_out) const {
    if (!cache.valid() || static_cast<int>(cache.inputs.size()) != num_layers())
      throw std::logic_error("Mlp::backward called without a matching forward pass");
    if (grad_out.rows() != output_dim() || grad_out.cols() != cache.inputs.front().cols())
      throw std::invalid_argument("Mlp::backward: output gradient shape mismatch");
    Gradients g;
    g.params = VectorXd::Zero(params_.size());
    MatrixXd delta = grad_out;
    for (int l = num_layers() - 1; l >= 0; --l) {
      Eigen::Map<MatrixXd>(g.params.data() + weight_offset_[l], sizes_[l + 1], sizes_[l]) =
          delta * cache.inputs[l].transpose();
      Eigen::Map<VectorXd>(g.params.data() + bias_offset_[l], sizes_[l + 1]) =
          delta.rowwise().sum();
      MatrixXd back = weight(l).transpose() * delta;
      if (l > 0) {
        back = (cache.preactivations[l - 1].array() > 0.0).select(back.array(), 0.0).matrix();
      }
      delta = std::move(back);
    }
    g.input = std::move(delta);
    return g;
  }

 private:
  void check_input(const MatrixXd& x) const {
    if (x.rows() != input_dim())
      throw std::invalid_argument("Mlp: expected input dimension " + std::to_string(input_dim()) +
                                  ", got " + std::to_string(x.rows()));
  }

  std::vector<int> sizes_;
  std::vector<Eigen::Index> weight_offset_;
  std::vector<Eigen::Index> bias_offset_;
  VectorXd params_;
};

struct AdamState {
  VectorXd m;
  VectorXd v;
  std::int64_t step = 0;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

inline AdamState make_adam_state(Eigen::Index n) {
  return {VectorXd::Zero(n), VectorXd::Zero(n), 0};
}

/// Bias-corrected Adam update in place.
inline void adam_step(VectorXd& params, const VectorXd& grads, double lr, AdamState& state,
                      const AdamConfig& cfg = {}) {
  if (state.m.size() != params.size()) state = make_adam_state(params.size());
  if (grads.size() != params.size()) throw std::invalid_argument("adam_step: size mismatch");
  ++state.step;
  state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grads;
  state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grads.cwiseAbs2();
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  params.array() -= lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + cfg.eps);
}

// ---------------------------------------------------------------------------
// Squashed Gaussian policy head

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;
inline constexpr double kSquashEps = 1e-6;

/// Per-sample quantities for a batch (one column per sample).
struct GaussianPolicyOutput {
  MatrixXd mean;
  MatrixXd log_std;     // clamped
  MatrixXd pre_squash;  // mean + std * noise
  MatrixXd action;      // tanh(pre_squash)
  VectorXd log_prob;    // includes the tanh change-of-variables term
  MatrixXd noise;
  MatrixXd raw_log_std;  // before clamping
};

/// Applies the head to raw network outputs [mean; log_std] with the given noise.
inline GaussianPolicyOutput squash_gaussian(const MatrixXd& raw, const MatrixXd& noise) {
  const Eigen::Index d = raw.rows() / 2;
  if (raw.rows() != 2 * d || noise.rows() != d || noise.cols() != raw.cols())
    throw std::invalid_argument("squash_gaussian: shape mismatch");
  GaussianPolicyOutput out;
  out.mean = raw.topRows(d);
  out.raw_log_std = raw.bottomRows(d);
  out.log_std = out.raw_log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
  out.noise = noise;
  out.pre_squash = out.mean.array() + out.log_std.array().exp() * noise.array();
  out.action = out.pre_squash.array().tanh();
  const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  MatrixXd per = -0.5 * noise.array().square() - out.log_std.array() - half_log_2pi -
                 (1.0 - out.action.array().square() + kSquashEps).log();
  out.log_prob = per.colwise().sum().transpose();
  return out;
}

inline MatrixXd standard_normal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = n(rng);
  return m;
}

/// Samples a = tanh(mu + sigma * xi), xi ~ N(0, I), for each column of `states`.
inline GaussianPolicyOutput sample_action(const Mlp& policy, const MatrixXd& states,
                                          std::mt19937_64& rng) {
  const MatrixXd raw = policy.predict(states);
  return squash_gaussian(raw, standard_normal(raw.rows() / 2, raw.cols(), rng));
}

/// tanh(mu): the deterministic action used for evaluation.
inline MatrixXd deterministic_action(const Mlp& policy, const MatrixXd& states) {
  const MatrixXd raw = policy.predict(states);
  return raw.topRows(raw.rows() / 2).array().tanh();
}

/// Gradient w.r.t. raw head outputs of sum_b [c_lp * log_prob_b + <g_a_b, action_b>].
inline MatrixXd squash_gaussian_backward(const GaussianPolicyOutput& out, const MatrixXd& grad_action,
                                         double grad_log_prob_scale) {
  const Eigen::Index d = out.mean.rows();
  const Eigen::Index n = out.mean.cols();
  const Eigen::ArrayXXd a = out.action.array();
  const Eigen::ArrayXXd one_minus = 1.0 - a.square();
  // d log_prob / d a = 2a / (1 - a^2 + eps)
  const Eigen::ArrayXXd dlp_da = 2.0 * a / (one_minus + kSquashEps);
  Eigen::ArrayXXd dl_da = grad_action.array();
  dl_da += grad_log_prob_scale * dlp_da;
  const Eigen::ArrayXXd dl_du = dl_da * one_minus;
  MatrixXd grad_raw(2 * d, n);
  grad_raw.topRows(d) = dl_du.matrix();
  const Eigen::ArrayXXd sigma = out.log_std.array().exp();
  Eigen::ArrayXXd dl_dls = dl_du * sigma * out.noise.array();
  dl_dls -= grad_log_prob_scale;
  const Eigen::ArrayXXd inside =
      (out.raw_log_std.array() >= kLogStdMin && out.raw_log_std.array() <= kLogStdMax)
          .cast<double>();
  grad_raw.bottomRows(d) = (dl_dls * inside).matrix();
  return grad_raw;
}

}  // namespace orbitarm::nn

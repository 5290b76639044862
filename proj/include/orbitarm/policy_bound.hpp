#pragma once
// Discrete-policy tables and a Monte-Carlo check of the policy-bias bounds of
// a prior-mixed policy: with pi_k = w pi_learned + (1 - w) pi_prior,
//   D(pi_k, pi_opt) >= D(pi_opt, pi_prior) - w D(pi_learned, pi_prior)
//   D(pi_k, pi_opt) == (1 - w) D(pi_opt, pi_prior)   when pi_learned = pi_opt
// where D is the sup-norm distance over state-action pairs.

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

namespace orbitarm {

/// |S| x |A| row-stochastic matrix.
class DiscretePolicyTable {
 public:
  explicit DiscretePolicyTable(Eigen::MatrixXd probs) : p_(std::move(probs)) {
    if (p_.rows() == 0 || p_.cols() == 0) throw std::invalid_argument("empty policy table");
    if ((p_.array() < 0.0).any()) throw std::invalid_argument("policy table has negative entries");
    for (Eigen::Index s = 0; s < p_.rows(); ++s)
      if (std::abs(p_.row(s).sum() - 1.0) > 1e-12)
        throw std::invalid_argument("policy table row does not sum to 1");
  }

  const Eigen::MatrixXd& probs() const { return p_; }
  Eigen::Index states() const { return p_.rows(); }
  Eigen::Index actions() const { return p_.cols(); }

  static DiscretePolicyTable random(Eigen::Index s, Eigen::Index a, std::mt19937_64& rng) {
    std::exponential_distribution<double> e(1.0);
    Eigen::MatrixXd m(s, a);
    for (Eigen::Index i = 0; i < s; ++i) {
      for (Eigen::Index j = 0; j < a; ++j) m(i, j) = e(rng);
      m.row(i) /= m.row(i).sum();
    }
    return DiscretePolicyTable(std::move(m));
  }

  /// Indicator policy of a deterministic action choice per state.
  static DiscretePolicyTable deterministic(Eigen::Index s, Eigen::Index a, std::mt19937_64& rng) {
    std::uniform_int_distribution<Eigen::Index> pick(0, a - 1);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(s, a);
    for (Eigen::Index i = 0; i < s; ++i) m(i, pick(rng)) = 1.0;
    return DiscretePolicyTable(std::move(m));
  }

  /// w * learned + (1 - w) * prior.
  static DiscretePolicyTable mix(const DiscretePolicyTable& learned, const DiscretePolicyTable& prior,
                                 double w) {
    if (w < 0.0 || w > 1.0) throw std::invalid_argument("mixing weight must lie in [0, 1]");
    if (learned.p_.rows() != prior.p_.rows() || learned.p_.cols() != prior.p_.cols())
      throw std::invalid_argument("policy table shapes differ");
    Eigen::MatrixXd m = w * learned.p_ + (1.0 - w) * prior.p_;
    // Renormalize rows against round-off so the invariant check stays exact.
    for (Eigen::Index i = 0; i < m.rows(); ++i) m.row(i) /= m.row(i).sum();
    return DiscretePolicyTable(std::move(m));
  }

 private:
  Eigen::MatrixXd p_;
};

/// sup over (s, a) of |p - q|.
inline double tv_distance(const DiscretePolicyTable& p, const DiscretePolicyTable& q) {
  if (p.states() != q.states() || p.actions() != q.actions())
    throw std::invalid_argument("tv_distance: policy table shapes differ");
  return (p.probs() - q.probs()).cwiseAbs().maxCoeff();
}

struct PolicyBoundReport {
  long trials = 0;
  long lower_bound_violations = 0;
  long limit_equality_violations = 0;
  double max_limit_error = 0.0;
  double min_lower_slack = 0.0;
  std::string counterexample;

  bool passed() const { return lower_bound_violations == 0 && limit_equality_violations == 0; }
};

inline constexpr double kBoundTolerance = 1e-12;

inline PolicyBoundReport verify_policy_bounds(long trials, std::mt19937_64& rng) {
  if (trials < 1) throw std::invalid_argument("need at least one trial");
  PolicyBoundReport report;
  report.min_lower_slack = std::numeric_limits<double>::infinity();
  std::uniform_int_distribution<Eigen::Index> dim(1, 10);
  std::uniform_int_distribution<Eigen::Index> adim(2, 10);
  std::uniform_real_distribution<double> uw(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  for (long t = 0; t < trials; ++t) {
    const Eigen::Index s = dim(rng), a = adim(rng);
    const double w = uw(rng);
    const DiscretePolicyTable opt = DiscretePolicyTable::random(s, a, rng);
    const DiscretePolicyTable prior =
        coin(rng) ? DiscretePolicyTable::deterministic(s, a, rng) : DiscretePolicyTable::random(s, a, rng);
    const DiscretePolicyTable learned = DiscretePolicyTable::random(s, a, rng);

    const double d_sub = tv_distance(opt, prior);
    const DiscretePolicyTable mixed = DiscretePolicyTable::mix(learned, prior, w);
    const double slack = tv_distance(mixed, opt) - (d_sub - w * tv_distance(learned, prior));
    report.min_lower_slack = std::min(report.min_lower_slack, slack);
    const bool lower_ok = slack >= -kBoundTolerance;

    const DiscretePolicyTable converged = DiscretePolicyTable::mix(opt, prior, w);
    const double err = std::abs(tv_distance(converged, opt) - (1.0 - w) * d_sub);
    report.max_limit_error = std::max(report.max_limit_error, err);
    const bool limit_ok = err <= kBoundTolerance;

    ++report.trials;
    if (!lower_ok) ++report.lower_bound_violations;
    if (!limit_ok) ++report.limit_equality_violations;
    if ((!lower_ok || !limit_ok) && report.counterexample.empty()) {
      std::ostringstream os;
      os << "trial " << t << " w=" << w << " slack=" << slack << " limit_err=" << err
         << "\npi_opt=\n" << opt.probs() << "\npi_prior=\n" << prior.probs()
         << "\npi_learned=\n" << learned.probs();
      report.counterexample = os.str();
    }
  }
  return report;
}

}  // namespace orbitarm

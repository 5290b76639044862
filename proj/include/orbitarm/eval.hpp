#pragma once
// Evaluation rollouts: policy sources, a small worker pool, and the success,
// tracking, base-mass and trace experiments. Results are merged by episode
// index, so output does not depend on the number of workers.

#include <orbitarm/env.hpp>
#include <orbitarm/nn.hpp>
#include <orbitarm/trainer.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace orbitarm {

// ---------------------------------------------------------------------------
// Worker pool

/// Worker count: hardware concurrency, capped by ORBITARM_THREADS when set.
inline int worker_count() {
  int n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("ORBITARM_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap >= 1) n = std::min<long>(n, cap);
  }
  return n;
}

/// Calls fn(i) for i in [0, n) on up to `workers` threads. The first exception is rethrown.
inline void parallel_for(int n, const std::function<void(int)>& fn, int workers = worker_count()) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Policies

using PolicyFn = std::function<Action(const Env&, const Observation&)>;

/// Deterministic learned mean blended with the prior; a null actor or w = 0 is the prior alone.
/// The actor is only read, so one instance may serve every worker.
inline PolicyFn mixed_eval_policy(const nn::Mlp* actor, double w) {
  if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("mixing weight must lie in [0, 1]");
  if (!actor && w > 0.0) throw std::invalid_argument("a learned policy needs an actor network");
  return [actor, w](const Env& env, const Observation& obs) -> Action {
    const Action prior = env.prior_action();
    if (!actor || w == 0.0) return prior;
    const Action learned = nn::deterministic_action(*actor, obs).col(0);
    return mixed_action(learned, prior, w);
  };
}

inline PolicyFn prior_only_policy() { return mixed_eval_policy(nullptr, 0.0); }

// ---------------------------------------------------------------------------
// Episodes

struct TraceRow {
  int step = 0;
  SystemVec q = SystemVec::Zero();
  SystemVec qd = SystemVec::Zero();
  std::array<double, kNumArms> e_p{};
  std::array<double, kNumArms> e_o{};  // max-axis
  double reward = 0.0;
  bool done = false;
  bool success = false;
};

struct EvalEpisode {
  int index = 0;
  double initial_yaw = 0.0;
  int steps = 0;
  bool success = false;
  int first_success_step = -1;
  bool collision = false;
  bool joint_limit = false;
  double final_e_p = 0.0;  // max over arms at the last step
  double final_e_o = 0.0;
  double total_reward = 0.0;
  // Per-step max-over-arms errors after the first success (inclusive).
  std::vector<double> tracked_e_p;
  std::vector<double> tracked_e_o;
  std::vector<double> all_e_p;
  std::vector<double> all_e_o;
  std::vector<TraceRow> trace;
};

struct EpisodeOptions {
  std::uint64_t seed = 0;
  EnvMode mode = EnvMode::kEval;
  std::optional<double> yaw;
  bool record_trace = false;
};

inline EvalEpisode run_episode(const EnvConfig& cfg, const PolicyFn& policy, const EpisodeOptions& opt) {
  Env env(cfg);
  Observation obs = env.reset(opt.seed, opt.mode, opt.yaw);
  EvalEpisode ep;
  ep.initial_yaw = env.target().yaw;
  while (!env.done()) {
    const StepResult r = env.step(policy(env, obs));
    obs = r.observation;
    ++ep.steps;
    ep.total_reward += r.reward;
    const auto d = r.info.errors.distance();
    const double e_o1 = r.info.errors.orientation[0].max_abs();
    const double e_o2 = r.info.errors.orientation[1].max_abs();
    const double ep_max = std::max(d[0], d[1]);
    const double eo_max = std::max(e_o1, e_o2);
    if (r.info.success && !ep.success) {
      ep.success = true;
      ep.first_success_step = ep.steps;
    }
    if (ep.success) {
      ep.tracked_e_p.push_back(ep_max);
      ep.tracked_e_o.push_back(eo_max);
    }
    ep.all_e_p.push_back(ep_max);
    ep.all_e_o.push_back(eo_max);
    ep.final_e_p = ep_max;
    ep.final_e_o = eo_max;
    ep.collision = r.info.collision;
    ep.joint_limit = r.info.joint_limit;
    if (opt.record_trace) {
      TraceRow row;
      row.step = ep.steps;
      row.q = env.state().joint_angles();
      row.qd = env.state().joint_velocities();
      row.e_p = d;
      row.e_o = {e_o1, e_o2};
      row.reward = r.reward;
      row.done = r.done;
      row.success = r.info.success;
      ep.trace.push_back(row);
    }
  }
  return ep;
}

/// Runs `n` eval-mode episodes with seeds derived from `seed`, in parallel.
inline std::vector<EvalEpisode> run_episodes(const EnvConfig& cfg, const PolicyFn& policy, int n,
                                             std::uint64_t seed, bool record_trace = false) {
  if (n < 1) throw std::invalid_argument("episode count must be >= 1");
  std::vector<EvalEpisode> out(n);
  parallel_for(n, [&](int i) {
    EpisodeOptions opt;
    opt.seed = episode_seed(seed, i);
    opt.record_trace = record_trace;
    out[i] = run_episode(cfg, policy, opt);
    out[i].index = i;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Experiments

struct MeanStd {
  long count = 0;
  double mean = std::numeric_limits<double>::quiet_NaN();
  double std = std::numeric_limits<double>::quiet_NaN();
};

/// Population statistics; empty input gives count 0 and NaN.
inline MeanStd mean_std(const std::vector<double>& v) {
  MeanStd s;
  s.count = static_cast<long>(v.size());
  if (v.empty()) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / v.size();
  double sq = 0.0;
  for (double x : v) sq += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(sq / v.size());
  return s;
}

struct SuccessSummary {
  int episodes = 0;
  int successes = 0;
  double rate() const { return episodes ? static_cast<double>(successes) / episodes : 0.0; }
  std::vector<EvalEpisode> details;
};

inline SuccessSummary eval_success(const EnvConfig& cfg, const PolicyFn& policy, int n, std::uint64_t seed) {
  SuccessSummary s;
  s.details = run_episodes(cfg, policy, n, seed);
  s.episodes = n;
  for (const auto& e : s.details) s.successes += e.success ? 1 : 0;
  return s;
}

struct TrackingResult {
  double spin_deg = 0.0;
  int episodes = 0;
  int acquired = 0;      // episodes that met the success condition
  MeanStd tracked_e_p;   // per-step errors after acquisition
  MeanStd tracked_e_o;
  MeanStd all_e_p;       // per-step errors over whole episodes
  MeanStd all_e_o;
  std::vector<EvalEpisode> details;
};

/// One entry per spin rate (deg/s) about the target z-axis.
inline std::vector<TrackingResult> eval_tracking(EnvConfig cfg, const PolicyFn& policy,
                                                 const std::vector<double>& spin_rates_deg, int episodes,
                                                 std::uint64_t seed, bool record_trace = true) {
  std::vector<TrackingResult> out;
  for (double deg : spin_rates_deg) {
    cfg.eval_spin_rate = deg * kPi / 180.0;
    TrackingResult r;
    r.spin_deg = deg;
    r.episodes = episodes;
    r.details = run_episodes(cfg, policy, episodes, seed, record_trace);
    std::vector<double> tp, to, ap, ao;
    for (const auto& e : r.details) {
      r.acquired += e.success ? 1 : 0;
      tp.insert(tp.end(), e.tracked_e_p.begin(), e.tracked_e_p.end());
      to.insert(to.end(), e.tracked_e_o.begin(), e.tracked_e_o.end());
      ap.insert(ap.end(), e.all_e_p.begin(), e.all_e_p.end());
      ao.insert(ao.end(), e.all_e_o.begin(), e.all_e_o.end());
    }
    r.tracked_e_p = mean_std(tp);
    r.tracked_e_o = mean_std(to);
    r.all_e_p = mean_std(ap);
    r.all_e_o = mean_std(ao);
    out.push_back(std::move(r));
  }
  return out;
}

struct MassSweepResult {
  double mass = 0.0;
  std::vector<EvalEpisode> details;
  double max_e_p() const {
    double m = 0.0;
    for (const auto& e : details) m = std::max(m, e.final_e_p);
    return m;
  }
  double max_e_o() const {
    double m = 0.0;
    for (const auto& e : details) m = std::max(m, e.final_e_o);
    return m;
  }
};

/// Stationary target with random yaw; the base inertia scales with its mass.
inline std::vector<MassSweepResult> sweep_mass(EnvConfig cfg, const PolicyFn& policy,
                                               const std::vector<double>& masses, int episodes,
                                               std::uint64_t seed) {
  const RobotModel nominal = cfg.model;
  cfg.eval_spin_rate = 0.0;
  std::vector<MassSweepResult> out;
  for (double m : masses) {
    if (!(m > 0.0)) throw std::invalid_argument("base mass must be positive");
    cfg.model = with_base_mass(nominal, m);
    MassSweepResult r;
    r.mass = m;
    r.details = run_episodes(cfg, policy, episodes, seed);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace orbitarm

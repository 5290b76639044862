#pragma once
// Command-line front end. Exit codes: 0 ok, 1 verification or run failure,
// 2 usage or configuration error.

#include <orbitarm/checkpoint.hpp>
#include <orbitarm/config.hpp>
#include <orbitarm/eval.hpp>
#include <orbitarm/io.hpp>
#include <orbitarm/trainer.hpp>
#include <orbitarm/verify.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace orbitarm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

namespace fs = std::filesystem;

// CSV schema identifiers; bump the version when columns change.
inline constexpr const char* kTrainSchema = "orbitarm.train/1";
inline constexpr const char* kEpisodeSchema = "orbitarm.train_episodes/1";
inline constexpr const char* kSuccessSchema = "orbitarm.eval_success/1";
inline constexpr const char* kTrackingSummarySchema = "orbitarm.tracking_summary/1";
inline constexpr const char* kTrackingTraceSchema = "orbitarm.tracking_traces/1";
inline constexpr const char* kMassSchema = "orbitarm.sweep_mass/1";
inline constexpr const char* kTraceSchema = "orbitarm.traces/1";

struct CommonOptions {
  std::string config = "default";
  std::optional<std::string> preset;
  std::uint64_t seed = 0;
  std::string out = ".";
  std::optional<std::string> reward;
  std::optional<double> base_mass;
  std::optional<double> spin_deg;
  std::optional<double> position_threshold;
  std::optional<double> orientation_threshold;
  std::optional<int> steps;
};

struct PolicyOptions {
  std::string source;  // checkpoint | prior-only | mixed
  std::string checkpoint;
  std::optional<double> w;
};

inline void add_common(CLI::App* app, CommonOptions& o, bool env_overrides = true) {
  app->add_option("--config", o.config, "Config file path or bundled config name")->capture_default_str();
  app->add_option("--preset", o.preset, "Budget preset: desk or paper");
  app->add_option("--seed", o.seed, "Master seed")->capture_default_str();
  app->add_option("--out", o.out, "Output directory")->capture_default_str();
  app->add_option("--reward", o.reward, "Orientation reward: max_cos, l1, l2, mean_cos");
  if (env_overrides) {
    app->add_option("--base-mass", o.base_mass, "Base mass override (kg)");
    app->add_option("--spin", o.spin_deg, "Target spin rate about its z-axis (deg/s)");
    app->add_option("--position-threshold", o.position_threshold, "Success position threshold (m)");
    app->add_option("--orientation-threshold", o.orientation_threshold, "Success orientation threshold (rad)");
  }
  app->add_option("--steps", o.steps, "Episode length in steps");
}

inline void add_policy(CLI::App* app, PolicyOptions& p) {
  app->add_option("--policy", p.source, "Policy source: checkpoint, prior-only or mixed")
      ->check(CLI::IsMember({"checkpoint", "prior-only", "mixed"}));
  app->add_option("--checkpoint", p.checkpoint, "Checkpoint written by train");
  app->add_option("--w", p.w, "Weight of the learned action (mixed)");
}

/// Loads the config and applies command-line overrides.
inline ExperimentConfig resolve_config(const CommonOptions& o) {
  ExperimentConfig c = load_experiment(o.config);
  if (o.preset) apply_preset(c, parse_preset(*o.preset));
  if (o.reward) {
    try {
      c.env.reward.orientation = parse_orientation_variant(*o.reward);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  }
  if (o.base_mass) {
    if (!(*o.base_mass > 0.0)) throw ConfigError("--base-mass must be positive");
    c.env.model = with_base_mass(c.env.model, *o.base_mass);
  }
  if (o.spin_deg) c.env.eval_spin_rate = *o.spin_deg * kDegToRad;
  if (o.position_threshold) c.env.reward.position_threshold = *o.position_threshold;
  if (o.orientation_threshold) c.env.reward.orientation_threshold = *o.orientation_threshold;
  if (o.steps) {
    c.env.episode_length = *o.steps;
    c.eval.episode_length = *o.steps;
  }
  validate(c);
  return c;
}

inline fs::path prepare_out_dir(const std::string& out) {
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw ConfigError("cannot create output directory " + out);
  return dir;
}

/// Policy plus the network that backs it (if any).
struct LoadedPolicy {
  std::unique_ptr<sac::SacAgent> agent;
  PolicyFn fn;
  std::string description;
  double w = 0.0;
};

inline LoadedPolicy load_policy(const PolicyOptions& p, const ExperimentConfig& c, const std::string& hash,
                                std::ostream& log) {
  std::string source = p.source;
  if (source.empty()) source = p.checkpoint.empty() ? "prior-only" : "checkpoint";
  LoadedPolicy out;
  if (source == "prior-only") {
    if (!p.checkpoint.empty()) throw ConfigError("--checkpoint is not used with --policy prior-only");
    out.fn = prior_only_policy();
    out.description = "prior-only";
    return out;
  }
  if (p.checkpoint.empty()) throw ConfigError("--policy " + source + " needs --checkpoint");
  out.agent = std::make_unique<sac::SacAgent>(c.sac, 0);
  CheckpointMeta meta;
  try {
    meta = load_checkpoint(fs::path(p.checkpoint), *out.agent);
  } catch (const CheckpointError& e) {
    throw ConfigError(std::string("checkpoint: ") + e.what());
  }
  if (meta.config_hash != hash)
    log << "note: checkpoint was trained with config " << meta.config_hash << ", evaluating with " << hash << "\n";
  out.w = meta.w;
  if (source == "mixed") {
    if (!p.w) throw ConfigError("--policy mixed needs --w");
    out.w = *p.w;
  } else if (p.w) {
    throw ConfigError("--w is only used with --policy mixed");
  }
  if (!(out.w >= 0.0 && out.w <= 1.0)) throw ConfigError("--w must lie in [0, 1]");
  out.fn = mixed_eval_policy(&out.agent->actor(), out.w);
  out.description = source + " (w=" + std::to_string(out.w) + ")";
  return out;
}

inline EnvConfig eval_env(const ExperimentConfig& c) {
  EnvConfig e = c.env;
  e.episode_length = c.eval.episode_length;
  return e;
}

inline std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(std::string(what) + ": cannot parse '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError(std::string(what) + ": empty list");
  return out;
}

inline void write_summary(const fs::path& path, json j, const std::string& hash, std::uint64_t seed) {
  j["config_hash"] = hash;
  j["seed"] = seed;
  save_json_file(path, j);
}

// ---------------------------------------------------------------------------
// Commands

inline int cmd_train(const CommonOptions& o, std::optional<double> w, std::optional<int> epochs, std::ostream& log) {
  ExperimentConfig c = resolve_config(o);
  if (w) c.train.mix.w = *w;
  if (epochs) c.train.epochs = *epochs;
  c.train.seed = o.seed;
  validate(c);
  const std::string hash = config_hash(c);
  const fs::path dir = prepare_out_dir(o.out);
  const std::string tag = "seed" + std::to_string(o.seed);
  save_json_file(dir / ("config_" + tag + ".json"), to_json(c));

  CsvWriter metrics(dir / ("train_" + tag + ".csv"), kTrainSchema, hash, o.seed,
                    {"epoch", "episode", "mean_reward", "critic_loss", "actor_loss", "alpha", "success_rate",
                     "mean_final_position_error", "w", "env_steps", "updates"});
  Env env(c.env);
  sac::SacAgent agent(c.sac, o.seed);
  TrainResult result;
  try {
    result = train(c.train, env, agent, [&](const EpochMetrics& m) {
      metrics.row() << m.epoch << m.last_episode << m.mean_reward << m.critic_loss << m.actor_loss << m.alpha
                    << m.success_rate << m.mean_final_position_error << m.w << m.env_steps << m.updates;
      metrics.flush();
      log << "epoch " << m.epoch << " reward " << m.mean_reward << " success " << m.success_rate << "\n";
    });
  } catch (const std::runtime_error& e) {
    log << "error: training aborted: " << e.what() << "\n";
    return kExitFailure;
  }
  CsvWriter episodes(dir / ("episodes_" + tag + ".csv"), kEpisodeSchema, hash, o.seed,
                     {"epoch", "episode", "steps", "total_reward", "w", "success", "collision", "joint_limit",
                      "final_position_error", "final_orientation_error", "target_yaw"});
  for (const EpisodeRecord& e : result.episodes)
    episodes.row() << e.epoch << e.episode << e.steps << e.total_reward << e.w << e.success << e.collision
                   << e.joint_limit << e.final_position_error << e.final_orientation_error << e.target_yaw;
  save_checkpoint(dir / ("checkpoint_" + tag + ".bin"), agent, CheckpointMeta{hash, c.train.mix.weight(c.train.epochs - 1, c.train.epochs), o.seed});
  write_summary(dir / ("train_" + tag + ".json"),
                {{"epochs", c.train.epochs},
                 {"final10_mean_reward", final_mean_reward(result, 10)},
                 {"final_success_rate", result.epochs.back().success_rate}},
                hash, o.seed);
  return kExitOk;
}

inline int cmd_eval_success(const CommonOptions& o, const PolicyOptions& p, std::optional<int> episodes,
                            std::ostream& log) {
  ExperimentConfig c = resolve_config(o);
  if (episodes) c.eval.success_episodes = *episodes;
  validate(c);
  const std::string hash = config_hash(c);
  const LoadedPolicy pol = load_policy(p, c, hash, log);
  const fs::path dir = prepare_out_dir(o.out);
  const SuccessSummary s = eval_success(eval_env(c), pol.fn, c.eval.success_episodes, o.seed);
  CsvWriter csv(dir / "eval_success.csv", kSuccessSchema, hash, o.seed,
                {"episode", "initial_yaw", "success", "first_success_step", "final_e_p", "final_e_o", "collision",
                 "joint_limit", "steps"});
  for (const EvalEpisode& e : s.details)
    csv.row() << e.index << e.initial_yaw << e.success << e.first_success_step << e.final_e_p << e.final_e_o
              << e.collision << e.joint_limit << e.steps;
  write_summary(dir / "eval_success.json",
                {{"policy", pol.description}, {"episodes", s.episodes}, {"successes", s.successes},
                 {"success_rate", s.rate()}},
                hash, o.seed);
  log << "success rate " << s.rate() << " (" << s.successes << "/" << s.episodes << ")\n";
  return kExitOk;
}

inline int cmd_eval_tracking(const CommonOptions& o, const PolicyOptions& p, const std::string& speeds,
                             std::optional<int> episodes, std::ostream& log) {
  ExperimentConfig c = resolve_config(o);
  if (!speeds.empty()) c.eval.spin_rates_deg = parse_list(speeds, "--speeds");
  if (episodes) c.eval.tracking_episodes = *episodes;
  validate(c);
  const std::string hash = config_hash(c);
  const LoadedPolicy pol = load_policy(p, c, hash, log);
  const fs::path dir = prepare_out_dir(o.out);
  const auto results = eval_tracking(eval_env(c), pol.fn, c.eval.spin_rates_deg, c.eval.tracking_episodes, o.seed);

  CsvWriter summary(dir / "tracking_summary.csv", kTrackingSummarySchema, hash, o.seed,
                    {"spin_deg", "episodes", "acquired", "tracked_samples", "tracked_e_p_mean", "tracked_e_p_std",
                     "tracked_e_o_mean", "tracked_e_o_std", "all_e_p_mean", "all_e_p_std", "all_e_o_mean",
                     "all_e_o_std"});
  std::vector<std::string> cols{"spin_deg", "episode", "step", "e_p1", "e_p2", "e_o1", "e_o2", "success"};
  for (int i = 1; i <= kTotalDof; ++i) cols.push_back("q" + std::to_string(i));
  for (int i = 1; i <= kTotalDof; ++i) cols.push_back("qd" + std::to_string(i));
  CsvWriter traces(dir / "tracking_traces.csv", kTrackingTraceSchema, hash, o.seed, cols);
  json per_speed = json::array();
  for (const TrackingResult& r : results) {
    summary.row() << r.spin_deg << r.episodes << r.acquired << r.tracked_e_p.count << r.tracked_e_p.mean
                  << r.tracked_e_p.std << r.tracked_e_o.mean << r.tracked_e_o.std << r.all_e_p.mean << r.all_e_p.std
                  << r.all_e_o.mean << r.all_e_o.std;
    for (const EvalEpisode& e : r.details)
      for (const TraceRow& t : e.trace) {
        auto row = traces.row();
        row << r.spin_deg << e.index << t.step << t.e_p[0] << t.e_p[1] << t.e_o[0] << t.e_o[1] << t.success;
        for (int i = 0; i < kTotalDof; ++i) row << t.q[i];
        for (int i = 0; i < kTotalDof; ++i) row << t.qd[i];
      }
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    per_speed.push_back({{"spin_deg", r.spin_deg},
                         {"acquired", r.acquired},
                         {"episodes", r.episodes},
                         {"tracked_e_p_mean", num(r.tracked_e_p.mean)},
                         {"tracked_e_o_mean", num(r.tracked_e_o.mean)},
                         {"all_e_p_mean", num(r.all_e_p.mean)},
                         {"all_e_o_mean", num(r.all_e_o.mean)}});
    log << "spin " << r.spin_deg << " deg/s: acquired " << r.acquired << "/" << r.episodes << ", mean e_p "
        << r.all_e_p.mean << "\n";
  }
  write_summary(dir / "tracking.json", {{"policy", pol.description}, {"speeds", per_speed}}, hash, o.seed);
  return kExitOk;
}

inline int cmd_sweep_mass(const CommonOptions& o, const PolicyOptions& p, const std::string& masses,
                          const std::string& factors, std::optional<int> episodes, std::ostream& log) {
  ExperimentConfig c = resolve_config(o);
  if (episodes) c.eval.sweep_episodes = *episodes;
  if (!masses.empty() && !factors.empty()) throw ConfigError("give either --masses or --factors");
  if (!factors.empty()) c.eval.mass_factors = parse_list(factors, "--factors");
  validate(c);
  const double nominal = c.env.model.base.mass;
  std::vector<double> list;
  if (!masses.empty()) {
    list = parse_list(masses, "--masses");
  } else {
    for (double f : c.eval.mass_factors) list.push_back(f * nominal);
  }
  for (double m : list)
    if (!(m > 0.0)) throw ConfigError("masses must be positive");
  const std::string hash = config_hash(c);
  const LoadedPolicy pol = load_policy(p, c, hash, log);
  const fs::path dir = prepare_out_dir(o.out);
  const auto results = sweep_mass(eval_env(c), pol.fn, list, c.eval.sweep_episodes, o.seed);
  CsvWriter csv(dir / "sweep_mass.csv", kMassSchema, hash, o.seed,
                {"mass", "episode", "max_e_p", "max_e_o", "success", "initial_yaw"});
  json per_mass = json::array();
  for (const MassSweepResult& r : results) {
    for (const EvalEpisode& e : r.details)
      csv.row() << r.mass << e.index << e.final_e_p << e.final_e_o << e.success << e.initial_yaw;
    per_mass.push_back({{"mass", r.mass}, {"max_e_p", r.max_e_p()}, {"max_e_o", r.max_e_o()}});
    log << "mass " << r.mass << ": max e_p " << r.max_e_p() << ", max e_o " << r.max_e_o() << "\n";
  }
  write_summary(dir / "sweep_mass.json", {{"policy", pol.description}, {"nominal_mass", nominal}, {"masses", per_mass}},
                hash, o.seed);
  return kExitOk;
}

inline int cmd_export_traces(const CommonOptions& o, const PolicyOptions& p, int episodes, std::optional<double> yaw,
                             std::ostream& log) {
  ExperimentConfig c = resolve_config(o);
  if (episodes < 1) throw ConfigError("--episodes must be >= 1");
  const std::string hash = config_hash(c);
  const LoadedPolicy pol = load_policy(p, c, hash, log);
  const fs::path dir = prepare_out_dir(o.out);
  std::vector<EvalEpisode> eps(episodes);
  const EnvConfig env = eval_env(c);
  parallel_for(episodes, [&](int i) {
    EpisodeOptions opt;
    opt.seed = episode_seed(o.seed, i);
    opt.yaw = yaw;
    opt.record_trace = true;
    eps[i] = run_episode(env, pol.fn, opt);
    eps[i].index = i;
  });
  std::vector<std::string> cols{"episode", "step"};
  for (int i = 1; i <= kTotalDof; ++i) cols.push_back("q" + std::to_string(i));
  for (int i = 1; i <= kTotalDof; ++i) cols.push_back("qd" + std::to_string(i));
  for (const char* s : {"e_p1", "e_p2", "e_o1", "e_o2", "reward", "done", "success"}) cols.push_back(s);
  CsvWriter csv(dir / "traces.csv", kTraceSchema, hash, o.seed, cols);
  for (const EvalEpisode& e : eps)
    for (const TraceRow& t : e.trace) {
      auto row = csv.row();
      row << e.index << t.step;
      for (int i = 0; i < kTotalDof; ++i) row << t.q[i];
      for (int i = 0; i < kTotalDof; ++i) row << t.qd[i];
      row << t.e_p[0] << t.e_p[1] << t.e_o[0] << t.e_o[1] << t.reward << t.done << t.success;
    }
  log << "wrote " << episodes << " episode trace(s) to " << (dir / "traces.csv").string() << "\n";
  return kExitOk;
}

inline std::vector<std::string> verify_suites() {
  return {"kinematics", "rewards", "bounds", "sac", "sac-learning"};
}

inline std::vector<verify::CheckResult> run_suite(const std::string& suite) {
  std::vector<verify::CheckResult> out;
  if (suite == "kinematics" || suite == "all") {
    out.push_back(verify::check_gjm_consistency());
    out.push_back(verify::check_momentum_conservation());
    out.push_back(verify::check_fixed_base_limit());
  }
  if (suite == "rewards" || suite == "all") {
    out.push_back(verify::check_reward_spot_values());
    out.push_back(verify::check_reward_gradients());
    out.push_back(verify::check_success_branch());
  }
  if (suite == "bounds" || suite == "all") out.push_back(verify::check_policy_bounds());
  if (suite == "sac" || suite == "all") out.push_back(verify::check_sac_gradients());
  if (suite == "sac-learning") {
    out.push_back(verify::check_sac_bandit());
    out.push_back(verify::check_sac_reacher().result);
  }
  return out;
}

inline int cmd_verify(const std::string& suite, const std::string& out, std::ostream& log) {
  const std::vector<verify::CheckResult> results = run_suite(suite);
  if (results.empty()) throw ConfigError("unknown suite '" + suite + "'");
  bool ok = true;
  json report = json::array();
  for (const auto& r : results) {
    log << verify::summary_line(r) << "\n";
    ok = ok && r.passed();
    report.push_back({{"name", r.name}, {"passed", r.passed()}, {"cases", r.cases}, {"failures", r.failures},
                      {"worst", r.worst}, {"threshold", r.threshold}, {"seconds", r.seconds},
                      {"first_failure", r.first_failure}});
  }
  if (!out.empty()) save_json_file(prepare_out_dir(out) / "verify.json", {{"suite", suite}, {"checks", report}});
  log << (ok ? "all checks passed" : "verification FAILED") << "\n";
  return ok ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Dual-arm free-floating space robot: mixed-policy SAC training and evaluation"};
  app.require_subcommand(1);

  CommonOptions common;
  PolicyOptions policy;
  std::optional<double> w;
  std::optional<int> epochs, episodes;
  std::string speeds, masses, factors, suite = "all", verify_out;
  int trace_episodes = 1;
  std::optional<double> yaw;

  auto* train_cmd = app.add_subcommand("train", "Train with the mixed policy; writes metrics CSV and a checkpoint");
  add_common(train_cmd, common, false);
  train_cmd->add_option("--w", w, "Weight of the learned action");
  train_cmd->add_option("--epochs", epochs, "Number of epochs");

  auto* success_cmd = app.add_subcommand("eval-success", "Success rate over random target orientations");
  add_common(success_cmd, common);
  add_policy(success_cmd, policy);
  success_cmd->add_option("--episodes", episodes, "Episode count");

  auto* tracking_cmd = app.add_subcommand("eval-tracking", "Tracking errors against a spinning target");
  add_common(tracking_cmd, common);
  add_policy(tracking_cmd, policy);
  tracking_cmd->add_option("--speeds", speeds, "Comma-separated spin rates in deg/s");
  tracking_cmd->add_option("--episodes", episodes, "Episodes per speed");

  auto* mass_cmd = app.add_subcommand("sweep-mass", "Final errors for several base masses");
  add_common(mass_cmd, common);
  add_policy(mass_cmd, policy);
  mass_cmd->add_option("--masses", masses, "Comma-separated base masses in kg");
  mass_cmd->add_option("--factors", factors, "Comma-separated multiples of the nominal base mass");
  mass_cmd->add_option("--episodes", episodes, "Episodes per mass");

  auto* verify_cmd = app.add_subcommand("verify", "Run property suites");
  verify_cmd->add_option("--suite", suite, "all, kinematics, rewards, bounds, sac, sac-learning")->capture_default_str();
  verify_cmd->add_option("--out", verify_out, "Directory for verify.json");

  auto* traces_cmd = app.add_subcommand("export-traces", "Per-step joint and error traces as CSV");
  add_common(traces_cmd, common);
  add_policy(traces_cmd, policy);
  traces_cmd->add_option("--episodes", trace_episodes, "Episode count")->capture_default_str();
  traces_cmd->add_option("--yaw", yaw, "Fixed initial target yaw (rad)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, log, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(common, w, epochs, log);
    if (*success_cmd) return cmd_eval_success(common, policy, episodes, log);
    if (*tracking_cmd) return cmd_eval_tracking(common, policy, speeds, episodes, log);
    if (*mass_cmd) return cmd_sweep_mass(common, policy, masses, factors, episodes, log);
    if (*verify_cmd) return cmd_verify(suite, verify_out, log);
    if (*traces_cmd) return cmd_export_traces(common, policy, trace_episodes, yaw, log);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace orbitarm::cli

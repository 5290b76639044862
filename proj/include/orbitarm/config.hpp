#pragma once
// Experiment configuration files: environment, learner, training budget and
// evaluation settings in one JSON document. Unknown keys are rejected.

#include <orbitarm/env.hpp>
#include <orbitarm/io.hpp>
#include <orbitarm/sac.hpp>
#include <orbitarm/trainer.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace orbitarm {

inline constexpr double kDegToRad = kPi / 180.0;

struct EvalConfig {
  int episode_length = 600;
  int success_episodes = 100;
  int sweep_episodes = 20;
  int tracking_episodes = 5;
  std::vector<double> mass_factors{0.5, 1.0, 2.0};
  std::vector<double> spin_rates_deg{0.0, 1.72, 2.29, 3.44};
};

struct ExperimentConfig {
  std::string name = "default";
  std::vector<std::uint64_t> seeds{0, 20, 100};
  std::string robot_file;  // empty: built-in description
  EnvConfig env;
  sac::SacConfig sac;
  TrainConfig train;
  EvalConfig eval;
};

enum class Preset { kDesk, kPaper };

inline Preset parse_preset(const std::string& s) {
  if (s == "desk") return Preset::kDesk;
  if (s == "paper") return Preset::kPaper;
  throw ConfigError("unknown preset '" + s + "' (expected desk or paper)");
}

/// desk: 100 epochs x 5 episodes, 40 updates per episode (20k updates), 128-unit layers.
/// paper: 1000 epochs x 5 episodes (1e6 env steps), one update per step, 256-unit layers.
inline void apply_preset(ExperimentConfig& c, Preset p) {
  c.train.episodes_per_epoch = 5;
  if (p == Preset::kDesk) {
    c.train.epochs = 100;
    c.train.updates_per_episode = 40;
    c.sac.actor_hidden = {128, 128};
    c.sac.critic_hidden = {128, 128};
  } else {
    c.train.epochs = 1000;
    c.train.updates_per_episode = -1;
    c.sac.actor_hidden = {256, 256};
    c.sac.critic_hidden = {256, 256};
  }
}

// ---------------------------------------------------------------------------
// to JSON (the fully resolved form, also the input of the config hash)

inline json to_json(const RewardConfig& r) {
  return {{"orientation", to_string(r.orientation)},
          {"w1", r.w1},
          {"w2", r.w2},
          {"success_bonus", r.success_bonus},
          {"position_threshold", r.position_threshold},
          {"orientation_threshold", r.orientation_threshold}};
}

inline json to_json(const EnvConfig& e) {
  json home = json::array();
  for (const auto& h : e.home) home.push_back(vec_to_json(h));
  json grasp = json::array();
  for (const auto& g : e.target.grasp) grasp.push_back(pose_to_json(g));
  return {{"dt", e.integrator.dt},
          {"substeps", e.integrator.substeps},
          {"max_joint_velocity", e.max_joint_velocity},
          {"episode_length", e.episode_length},
          {"home", home},
          {"target",
           {{"center", vec_to_json(e.target.center)},
            {"yaw", e.target.yaw},
            {"yaw_range", e.yaw_range},
            {"randomize_yaw", e.randomize_yaw},
            {"spin_rate_deg", e.eval_spin_rate / kDegToRad},
            {"half_extents", vec_to_json(e.geometry.target_half_extents)},
            {"grasp", grasp}}},
          {"collision",
           {{"link_radius", e.geometry.link_radius},
            {"min_link_separation", e.geometry.min_link_separation},
            {"penalty", e.collision_penalty}}},
          {"reward", to_json(e.reward)},
          {"prior", {{"damping", e.prior.damping}, {"step_length", e.prior.step_length}}},
          {"base_mass", e.model.base.mass}};
}

inline json to_json(const sac::SacConfig& s) {
  return {{"actor_hidden", s.actor_hidden}, {"critic_hidden", s.critic_hidden},
          {"actor_lr", s.actor_lr},         {"critic_lr", s.critic_lr},
          {"gamma", s.gamma},               {"polyak", s.polyak},
          {"batch_size", s.batch_size},     {"buffer_capacity", s.buffer_capacity},
          {"alpha", s.alpha},               {"auto_alpha", s.auto_alpha},
          {"target_entropy", s.target_entropy}, {"alpha_lr", s.alpha_lr}};
}

inline json to_json(const TrainConfig& t) {
  return {{"epochs", t.epochs},
          {"episodes_per_epoch", t.episodes_per_epoch},
          {"updates_per_episode", t.updates_per_episode},
          {"w", t.mix.w},
          {"w_ramp", {{"enabled", t.mix.ramp}, {"start", t.mix.w_start}, {"end", t.mix.w_end}}},
          {"store_learned_action", t.store_learned_action}};
}

inline json to_json(const EvalConfig& e) {
  return {{"episode_length", e.episode_length},     {"success_episodes", e.success_episodes},
          {"sweep_episodes", e.sweep_episodes},     {"tracking_episodes", e.tracking_episodes},
          {"mass_factors", e.mass_factors},         {"spin_rates_deg", e.spin_rates_deg}};
}

inline json to_json(const ExperimentConfig& c) {
  return {{"name", c.name},
          {"seeds", c.seeds},
          {"robot", robot_model_to_json(c.env.model)},
          {"env", to_json(c.env)},
          {"sac", to_json(c.sac)},
          {"train", to_json(c.train)},
          {"eval", to_json(c.eval)}};
}

inline std::string config_hash(const ExperimentConfig& c) { return config_hash(to_json(c)); }

// ---------------------------------------------------------------------------
// from JSON (partial documents override the defaults)

inline void read_reward(const json& j, RewardConfig& r) {
  check_keys(j, {"orientation", "w1", "w2", "success_bonus", "position_threshold",
                 "orientation_threshold"}, "env.reward");
  if (j.contains("orientation")) {
    try {
      r.orientation = parse_orientation_variant(j["orientation"].get<std::string>());
    } catch (const std::exception& e) {
      throw ConfigError(std::string("env.reward.orientation: ") + e.what());
    }
  }
  read_if(j, "w1", r.w1, "env.reward");
  read_if(j, "w2", r.w2, "env.reward");
  read_if(j, "success_bonus", r.success_bonus, "env.reward");
  read_if(j, "position_threshold", r.position_threshold, "env.reward");
  read_if(j, "orientation_threshold", r.orientation_threshold, "env.reward");
}

inline void read_env(const json& j, EnvConfig& e) {
  check_keys(j, {"dt", "substeps", "max_joint_velocity", "episode_length", "home", "target",
                 "collision", "reward", "prior", "base_mass"}, "env");
  read_if(j, "dt", e.integrator.dt, "env");
  read_if(j, "substeps", e.integrator.substeps, "env");
  read_if(j, "max_joint_velocity", e.max_joint_velocity, "env");
  read_if(j, "episode_length", e.episode_length, "env");
  if (j.contains("home")) {
    const json& h = j["home"];
    if (!h.is_array() || h.size() != kNumArms) throw ConfigError("env.home: expected two joint vectors");
    for (int a = 0; a < kNumArms; ++a) e.home[a] = vec_from_json<kArmDof>(h[a], "env.home");
  }
  if (j.contains("target")) {
    const json& t = j["target"];
    check_keys(t, {"center", "position", "world_offset", "yaw", "yaw_range", "randomize_yaw",
                   "spin_rate_deg", "half_extents", "grasp"}, "env.target");
    if (t.contains("center") && t.contains("position"))
      throw ConfigError("env.target: give either center or position, not both");
    if (t.contains("center")) e.target.center = vec_from_json<3>(t["center"], "env.target.center");
    if (t.contains("position")) {
      // A position in another world frame plus the offset that maps it into ours.
      Vec3 offset = Vec3::Zero();
      if (t.contains("world_offset")) offset = vec_from_json<3>(t["world_offset"], "env.target.world_offset");
      e.target.center = vec_from_json<3>(t["position"], "env.target.position") + offset;
    } else if (t.contains("world_offset")) {
      throw ConfigError("env.target.world_offset requires env.target.position");
    }
    read_if(t, "yaw", e.target.yaw, "env.target");
    read_if(t, "yaw_range", e.yaw_range, "env.target");
    read_if(t, "randomize_yaw", e.randomize_yaw, "env.target");
    double spin_deg = e.eval_spin_rate / kDegToRad;
    read_if(t, "spin_rate_deg", spin_deg, "env.target");
    e.eval_spin_rate = spin_deg * kDegToRad;
    if (t.contains("half_extents"))
      e.geometry.target_half_extents = vec_from_json<3>(t["half_extents"], "env.target.half_extents");
    if (t.contains("grasp")) {
      const json& g = t["grasp"];
      if (!g.is_array() || g.size() != kNumArms) throw ConfigError("env.target.grasp: expected two poses");
      for (int a = 0; a < kNumArms; ++a) e.target.grasp[a] = pose_from_json(g[a], "env.target.grasp");
    }
  }
  if (j.contains("collision")) {
    const json& c = j["collision"];
    check_keys(c, {"link_radius", "min_link_separation", "penalty"}, "env.collision");
    if (c.contains("link_radius")) {
      const auto r = vec_from_json<kArmDof>(c["link_radius"], "env.collision.link_radius");
      for (int k = 0; k < kArmDof; ++k) e.geometry.link_radius[k] = r[k];
    }
    read_if(c, "min_link_separation", e.geometry.min_link_separation, "env.collision");
    read_if(c, "penalty", e.collision_penalty, "env.collision");
  }
  if (j.contains("reward")) read_reward(j["reward"], e.reward);
  if (j.contains("prior")) {
    const json& p = j["prior"];
    check_keys(p, {"damping", "step_length"}, "env.prior");
    read_if(p, "damping", e.prior.damping, "env.prior");
    read_if(p, "step_length", e.prior.step_length, "env.prior");
  }
}

inline void read_sac(const json& j, sac::SacConfig& s) {
  check_keys(j, {"actor_hidden", "critic_hidden", "actor_lr", "critic_lr", "gamma", "polyak",
                 "batch_size", "buffer_capacity", "alpha", "auto_alpha", "target_entropy", "alpha_lr"},
             "sac");
  read_if(j, "actor_hidden", s.actor_hidden, "sac");
  read_if(j, "critic_hidden", s.critic_hidden, "sac");
  read_if(j, "actor_lr", s.actor_lr, "sac");
  read_if(j, "critic_lr", s.critic_lr, "sac");
  read_if(j, "gamma", s.gamma, "sac");
  read_if(j, "polyak", s.polyak, "sac");
  read_if(j, "batch_size", s.batch_size, "sac");
  read_if(j, "buffer_capacity", s.buffer_capacity, "sac");
  read_if(j, "alpha", s.alpha, "sac");
  read_if(j, "auto_alpha", s.auto_alpha, "sac");
  read_if(j, "target_entropy", s.target_entropy, "sac");
  read_if(j, "alpha_lr", s.alpha_lr, "sac");
}

inline void read_train(const json& j, TrainConfig& t) {
  check_keys(j, {"epochs", "episodes_per_epoch", "updates_per_episode", "w", "w_ramp",
                 "store_learned_action"}, "train");
  read_if(j, "epochs", t.epochs, "train");
  read_if(j, "episodes_per_epoch", t.episodes_per_epoch, "train");
  read_if(j, "updates_per_episode", t.updates_per_episode, "train");
  read_if(j, "w", t.mix.w, "train");
  if (j.contains("w_ramp")) {
    const json& r = j["w_ramp"];
    check_keys(r, {"enabled", "start", "end"}, "train.w_ramp");
    read_if(r, "enabled", t.mix.ramp, "train.w_ramp");
    read_if(r, "start", t.mix.w_start, "train.w_ramp");
    read_if(r, "end", t.mix.w_end, "train.w_ramp");
  }
  read_if(j, "store_learned_action", t.store_learned_action, "train");
}

inline void read_eval(const json& j, EvalConfig& e) {
  check_keys(j, {"episode_length", "success_episodes", "sweep_episodes", "tracking_episodes",
                 "mass_factors", "spin_rates_deg"}, "eval");
  read_if(j, "episode_length", e.episode_length, "eval");
  read_if(j, "success_episodes", e.success_episodes, "eval");
  read_if(j, "sweep_episodes", e.sweep_episodes, "eval");
  read_if(j, "tracking_episodes", e.tracking_episodes, "eval");
  read_if(j, "mass_factors", e.mass_factors, "eval");
  read_if(j, "spin_rates_deg", e.spin_rates_deg, "eval");
}

inline void validate(const ExperimentConfig& c) {
  try {
    c.env.reward.validate();
    c.train.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const EnvConfig& e = c.env;
  if (!(e.integrator.dt > 0.0) || e.integrator.substeps < 1) throw ConfigError("env: dt and substeps must be positive");
  if (!(e.max_joint_velocity > 0.0)) throw ConfigError("env.max_joint_velocity must be positive");
  if (e.episode_length < 1) throw ConfigError("env.episode_length must be >= 1");
  if (!(e.yaw_range >= 0.0)) throw ConfigError("env.target.yaw_range must be non-negative");
  for (double r : e.geometry.link_radius)
    if (!(r > 0.0)) throw ConfigError("env.collision.link_radius entries must be positive");
  if (!(e.prior.damping > 0.0) || !(e.prior.step_length > 0.0))
    throw ConfigError("env.prior: damping and step_length must be positive");
  const sac::SacConfig& s = c.sac;
  if (s.actor_hidden.empty() || s.critic_hidden.empty()) throw ConfigError("sac: hidden layers required");
  for (int h : s.actor_hidden)
    if (h < 1) throw ConfigError("sac.actor_hidden entries must be positive");
  for (int h : s.critic_hidden)
    if (h < 1) throw ConfigError("sac.critic_hidden entries must be positive");
  if (s.batch_size < 1 || s.buffer_capacity < static_cast<std::size_t>(s.batch_size))
    throw ConfigError("sac: buffer_capacity must be >= batch_size >= 1");
  if (!(s.gamma >= 0.0 && s.gamma <= 1.0) || !(s.polyak >= 0.0 && s.polyak <= 1.0))
    throw ConfigError("sac: gamma and polyak must lie in [0, 1]");
  if (!(s.alpha > 0.0)) throw ConfigError("sac.alpha must be positive");
  if (c.eval.episode_length < 1 || c.eval.success_episodes < 1 || c.eval.sweep_episodes < 1 ||
      c.eval.tracking_episodes < 1)
    throw ConfigError("eval: episode counts and lengths must be >= 1");
  for (double f : c.eval.mass_factors)
    if (!(f > 0.0)) throw ConfigError("eval.mass_factors entries must be positive");
  if (c.seeds.empty()) throw ConfigError("seeds must not be empty");
}

/// Resolves a robot description path against the config directory, then the data directory.
inline std::filesystem::path resolve_data_path(const std::string& name, const std::filesystem::path& config_dir) {
  namespace fs = std::filesystem;
  const fs::path p(name);
  if (p.is_absolute()) return p;
  if (!config_dir.empty() && fs::exists(config_dir / p)) return config_dir / p;
#ifdef ORBITARM_DATA_DIR
  if (fs::exists(fs::path(ORBITARM_DATA_DIR) / p)) return fs::path(ORBITARM_DATA_DIR) / p;
#endif
  return p;
}

inline ExperimentConfig experiment_from_json(const json& j, const std::filesystem::path& config_dir = {}) {
  check_keys(j, {"name", "preset", "seeds", "robot", "env", "sac", "train", "eval"}, "config");
  ExperimentConfig c;
  try {
    if (j.contains("preset")) apply_preset(c, parse_preset(j["preset"].get<std::string>()));
    read_if(j, "name", c.name, "config");
    read_if(j, "seeds", c.seeds, "config");
    if (j.contains("robot")) {
      if (j["robot"].is_string()) {
        c.robot_file = j["robot"].get<std::string>();
        c.env.model = load_robot_model(resolve_data_path(c.robot_file, config_dir));
      } else {
        c.env.model = robot_model_from_json(j["robot"]);
      }
    }
    if (j.contains("env")) {
      read_env(j["env"], c.env);
      if (j["env"].contains("base_mass"))
        c.env.model = with_base_mass(c.env.model, j["env"]["base_mass"].get<double>());
    }
    if (j.contains("sac")) read_sac(j["sac"], c.sac);
    if (j.contains("train")) read_train(j["train"], c.train);
    if (j.contains("eval")) read_eval(j["eval"], c.eval);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  validate(c);
  return c;
}

/// Loads a config by path, or by bare name from the bundled configs directory.
inline ExperimentConfig load_experiment(const std::string& name_or_path) {
  namespace fs = std::filesystem;
  fs::path p(name_or_path);
  if (!fs::exists(p)) {
#ifdef ORBITARM_CONFIG_DIR
    const fs::path bundled = fs::path(ORBITARM_CONFIG_DIR) / (name_or_path + ".json");
    if (fs::exists(bundled)) p = bundled;
#endif
  }
  if (!fs::exists(p)) throw ConfigError("config not found: " + name_or_path);
  return experiment_from_json(read_json_file(p), p.parent_path());
}

}  // namespace orbitarm

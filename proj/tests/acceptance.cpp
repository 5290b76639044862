// Acceptance run: one PASS/FAIL line per criterion. Exit status 1 if any fail.
//
//   acceptance --cli <path to orbitarm> --work <artifact dir> [--quick]

#include <orbitarm/config.hpp>
#include <orbitarm/eval.hpp>
#include <orbitarm/io.hpp>
#include <orbitarm/verify.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

using namespace orbitarm;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS " : "FAIL ") << name << " :: " << detail << std::endl;
  if (!ok) ++g_failures;
}

void report(const verify::CheckResult& r) { report(r.name, r.passed(), verify::check_detail(r)); }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

int run_command(const std::string& cmd, const fs::path& log) {
  const std::string full = cmd + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(full.c_str());
  if (status == -1) return -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

struct Csv {
  std::vector<std::string> meta;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) out.push_back(f);
  return out;
}

Csv read_csv(const fs::path& p) {
  Csv c;
  std::ifstream in(p);
  if (!in) throw std::runtime_error("missing " + p.string());
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) == 0)
      c.meta.push_back(line);
    else if (c.header.empty())
      c.header = split(line);
    else
      c.rows.push_back(split(line));
  }
  return c;
}

int column(const Csv& c, const std::string& name) {
  for (std::size_t i = 0; i < c.header.size(); ++i)
    if (c.header[i] == name) return static_cast<int>(i);
  throw std::runtime_error("column " + name + " not found");
}

/// Provenance lines, exact header, rectangular rows, numeric cells. Columns in
/// `nan_ok` may hold "nan". Returns an empty string when valid.
std::string validate_csv(const Csv& c, const std::string& schema, const std::vector<std::string>& header,
                         std::optional<std::size_t> rows, const std::vector<std::string>& nan_ok = {}) {
  if (c.meta.size() != 3) return "expected 3 provenance lines";
  if (c.meta[0] != "# schema=" + schema) return "schema line '" + c.meta[0] + "'";
  if (!std::regex_match(c.meta[1], std::regex("# config_hash=[0-9a-f]{16}"))) return "config_hash line";
  if (!std::regex_match(c.meta[2], std::regex("# seed=[0-9]+"))) return "seed line";
  if (c.header != header) return "header mismatch";
  if (rows && c.rows.size() != *rows)
    return "expected " + std::to_string(*rows) + " rows, got " + std::to_string(c.rows.size());
  for (const auto& r : c.rows) {
    if (r.size() != header.size()) return "ragged row";
    for (std::size_t i = 0; i < r.size(); ++i) {
      const bool may_nan = std::find(nan_ok.begin(), nan_ok.end(), header[i]) != nan_ok.end();
      if (may_nan && r[i] == "nan") continue;
      char* end = nullptr;
      const double v = std::strtod(r[i].c_str(), &end);
      if (end == r[i].c_str() || *end != '\0' || !std::isfinite(v)) return "bad cell '" + r[i] + "' in " + header[i];
    }
  }
  return {};
}

// ---------------------------------------------------------------------------

void kinematics_suite() {
  report(verify::check_gjm_consistency());
  report(verify::check_momentum_conservation());
  report(verify::check_fixed_base_limit());
}

void reward_suite() {
  report(verify::check_reward_spot_values());
  report(verify::check_reward_gradients());
  report(verify::check_success_branch());
}

void bound_suite() { report(verify::check_policy_bounds()); }

void sac_suite() {
  report(verify::check_sac_gradients());
  report(verify::check_sac_bandit());
  const verify::ReacherCheck rc = verify::check_sac_reacher();
  std::string detail = verify::check_detail(rc.result) + " | deterministic eval success:";
  for (const auto& run : rc.runs) detail += " " + fmt(run.eval_success_rate);
  report(rc.result.name, rc.result.passed(), detail);
}

struct SeedOutcome {
  double final10 = 0.0;
  double early_error = 0.0;  // mean final position error, first 5 episodes
};

SeedOutcome read_training(const fs::path& dir, std::uint64_t seed) {
  SeedOutcome s;
  const std::string tag = "seed" + std::to_string(seed);
  s.final10 = read_json_file(dir / ("train_" + tag + ".json")).at("final10_mean_reward").get<double>();
  const Csv eps = read_csv(dir / ("episodes_" + tag + ".csv"));
  const int col = column(eps, "final_position_error");
  if (eps.rows.size() < 5) throw std::runtime_error("fewer than 5 episodes in " + dir.string());
  for (int i = 0; i < 5; ++i) s.early_error += std::stod(eps.rows[i][col]) / 5.0;
  return s;
}

void directional_claims(const std::string& cli, const fs::path& work, const std::vector<std::uint64_t>& seeds,
                        const std::string& extra) {
  bool reward_ok = true, early_ok = true, ran = true;
  std::string reward_detail, early_detail;
  for (std::uint64_t seed : seeds) {
    SeedOutcome out[2];
    const char* weights[2] = {"0.5", "1"};
    for (int k = 0; k < 2; ++k) {
      const fs::path dir = work / ("train_w" + std::string(k == 0 ? "05" : "1"));
      fs::create_directories(dir);
      const std::string cmd = "\"" + cli + "\" train --seed " + std::to_string(seed) + " --w " + weights[k] +
                              " --out \"" + dir.string() + "\"" + extra;
      const int code = run_command(cmd, dir / ("train_seed" + std::to_string(seed) + ".log"));
      if (code != 0) {
        report("desk.train_seed" + std::to_string(seed) + "_w" + weights[k], false, "train exited " + std::to_string(code));
        ran = false;
        continue;
      }
      out[k] = read_training(dir, seed);
    }
    if (!ran) continue;
    const bool r = out[0].final10 > out[1].final10;
    const bool e = out[0].early_error < out[1].early_error;
    reward_ok = reward_ok && r;
    early_ok = early_ok && e;
    reward_detail += " seed " + std::to_string(seed) + ": " + fmt(out[0].final10) + " vs " + fmt(out[1].final10) + (r ? "" : " (x)") + ";";
    early_detail += " seed " + std::to_string(seed) + ": " + fmt(out[0].early_error) + " vs " + fmt(out[1].early_error) + (e ? "" : " (x)") + ";";
  }
  report("desk.mixed_beats_pure_final10_reward", ran && reward_ok, "w=0.5 vs w=1," + reward_detail);
  report("desk.early_exploration_concentration", ran && early_ok, "first-5-episode final error, w=0.5 vs w=1," + early_detail);
}

void prior_only_reach(const std::vector<std::uint64_t>& seeds) {
  ExperimentConfig c = load_experiment("default");
  EnvConfig env = c.env;
  env.episode_length = 200;
  env.eval_spin_rate = 0.0;
  bool ok = true;
  std::string detail;
  for (std::uint64_t seed : seeds) {
    const EvalEpisode ep = run_episode(env, prior_only_policy(), EpisodeOptions{seed, EnvMode::kEval, std::nullopt, false});
    double best = 1e300;
    for (double e : ep.all_e_p) best = std::min(best, e);
    ok = ok && best < 0.05 && !ep.collision;
    detail += " seed " + std::to_string(seed) + ": min e_p " + fmt(best) + " (final " + fmt(ep.final_e_p) + ");";
  }
  report("desk.prior_only_reach", ok, "max-over-arms position error within 200 steps < 0.05 m," + detail);
}

void robustness_contract(const std::string& cli, const fs::path& work, int sweep_episodes, int tracking_episodes,
                         int steps) {
  auto extra = [&](int episodes) {
    return " --episodes " + std::to_string(episodes) + " --steps " + std::to_string(steps);
  };
  const ExperimentConfig c = load_experiment("default");
  {
    const fs::path dir = work / "sweep_mass";
    const int code = run_command("\"" + cli + "\" sweep-mass --policy prior-only --factors 0.5,1,2 --out \"" +
                                     dir.string() + "\"" + extra(sweep_episodes),
                                 work / "sweep_mass.log");
    std::string err = code == 0 ? "" : "exit " + std::to_string(code);
    if (err.empty()) {
      try {
        const Csv csv = read_csv(dir / "sweep_mass.csv");
        err = validate_csv(csv, "orbitarm.sweep_mass/1", {"mass", "episode", "max_e_p", "max_e_o", "success", "initial_yaw"},
                           3 * static_cast<std::size_t>(sweep_episodes));
        if (err.empty()) {
          std::vector<double> masses;
          for (const auto& r : csv.rows)
            if (masses.empty() || masses.back() != std::stod(r[0])) masses.push_back(std::stod(r[0]));
          const double m0 = c.env.model.base.mass;
          if (masses.size() != 3 || std::abs(masses[0] - 0.5 * m0) > 1e-9 || std::abs(masses[1] - m0) > 1e-9 ||
              std::abs(masses[2] - 2 * m0) > 1e-9)
            err = "mass column does not cover {0.5, 1, 2} x nominal";
        }
      } catch (const std::exception& e) {
        err = e.what();
      }
    }
    report("robustness.sweep_mass_prior_only", err.empty(), err.empty() ? "sweep_mass.csv valid over 0.5x, 1x, 2x" : err);
  }
  {
    const fs::path dir = work / "tracking";
    const int code = run_command("\"" + cli + "\" eval-tracking --policy prior-only --speeds 0,1.72,2.29,3.44 --out \"" +
                                     dir.string() + "\"" + extra(tracking_episodes),
                                 work / "tracking.log");
    std::string err = code == 0 ? "" : "exit " + std::to_string(code);
    if (err.empty()) {
      try {
        const Csv summary = read_csv(dir / "tracking_summary.csv");
        err = validate_csv(summary, "orbitarm.tracking_summary/1",
                           {"spin_deg", "episodes", "acquired", "tracked_samples", "tracked_e_p_mean", "tracked_e_p_std",
                            "tracked_e_o_mean", "tracked_e_o_std", "all_e_p_mean", "all_e_p_std", "all_e_o_mean",
                            "all_e_o_std"},
                           4, {"tracked_e_p_mean", "tracked_e_p_std", "tracked_e_o_mean", "tracked_e_o_std"});
        if (err.empty()) {
          const double want[4] = {0.0, 1.72, 2.29, 3.44};
          for (int i = 0; i < 4; ++i)
            if (std::abs(std::stod(summary.rows[i][0]) - want[i]) > 1e-12) err = "spin column mismatch";
        }
        if (err.empty()) {
          std::vector<std::string> cols{"spin_deg", "episode", "step", "e_p1", "e_p2", "e_o1", "e_o2", "success"};
          for (int i = 1; i <= kTotalDof; ++i) cols.push_back("q" + std::to_string(i));
          for (int i = 1; i <= kTotalDof; ++i) cols.push_back("qd" + std::to_string(i));
          // Episodes may end early on collision or joint limits, so each
          // (speed, episode) block holds steps 1..n with 1 <= n <= steps.
          const Csv traces = read_csv(dir / "tracking_traces.csv");
          err = validate_csv(traces, "orbitarm.tracking_traces/1", cols, std::nullopt);
          std::vector<std::pair<std::string, int>> blocks;
          std::vector<int> lengths;
          for (const auto& r : traces.rows) {
            if (!err.empty()) break;
            const std::pair<std::string, int> key{r[0], std::stoi(r[1])};
            const int step = std::stoi(r[2]);
            if (blocks.empty() || blocks.back() != key) {
              blocks.push_back(key);
              lengths.push_back(0);
            }
            if (step != ++lengths.back()) err = "trace steps not contiguous from 1";
          }
          if (err.empty() && blocks.size() != 4u * tracking_episodes)
            err = "expected " + std::to_string(4 * tracking_episodes) + " trace blocks, got " + std::to_string(blocks.size());
          for (int n : lengths)
            if (err.empty() && n > steps) err = "trace longer than the episode length";
        }
      } catch (const std::exception& e) {
        err = e.what();
      }
    }
    report("robustness.eval_tracking_prior_only", err.empty(),
           err.empty() ? "tracking_summary.csv and tracking_traces.csv valid over 0, 1.72, 2.29, 3.44 deg/s" : err);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string cli;
  std::string work = "acceptance_artifacts";
  bool quick = false;
  app.add_option("--cli", cli, "Path to the orbitarm binary")->required();
  app.add_option("--work", work, "Artifact directory");
  app.add_flag("--quick", quick, "Short training runs (plumbing check only; criteria use full desk runs)");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work);
  const std::vector<std::uint64_t> seeds{0, 20, 100};
  const std::string extra = quick ? " --epochs 2 --steps 20" : "";

  try {
    kinematics_suite();
    reward_suite();
    bound_suite();
    sac_suite();
    directional_claims(cli, work, seeds, extra);
    prior_only_reach(seeds);
    const ExperimentConfig defaults = load_experiment("default");
    if (quick)
      robustness_contract(cli, work, 1, 1, 20);
    else
      robustness_contract(cli, work, defaults.eval.sweep_episodes, defaults.eval.tracking_episodes,
                          defaults.eval.episode_length);
  } catch (const std::exception& e) {
    report("acceptance.harness", false, e.what());
  }
  std::cout << (g_failures == 0 ? "ALL CRITERIA PASSED" : std::to_string(g_failures) + " CRITERIA FAILED") << std::endl;
  return g_failures == 0 ? 0 : 1;
}

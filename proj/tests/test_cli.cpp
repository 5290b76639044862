#include <orbitarm/cli.hpp>
#include <orbitarm/eval.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace orbitarm;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "orbitarm");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("orbitarm_test_cli_" + name);
  fs::remove_all(p);
  return p;
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
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) == 0) {
      c.meta.push_back(line);
    } else if (c.header.empty()) {
      c.header = split(line);
    } else {
      c.rows.push_back(split(line));
    }
  }
  return c;
}

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run_cli({}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"bogus"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"eval-success", "--config", "/nonexistent/config.json"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"eval-success", "--preset", "galaxy", "--out", fresh_dir("preset").string()}).code,
            cli::kExitUsage);
  EXPECT_EQ(run_cli({"verify", "--suite", "nope"}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"sweep-mass", "--masses", "1,-2", "--out", fresh_dir("neg").string()}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"train", "--w", "1.5", "--out", fresh_dir("w").string()}).code, cli::kExitUsage);
  EXPECT_EQ(run_cli({"eval-success", "--policy", "checkpoint", "--out", fresh_dir("ck").string()}).code,
            cli::kExitUsage);
}

TEST(Cli, HelpExitsZero) { EXPECT_EQ(run_cli({"--help"}).code, cli::kExitOk); }

TEST(Cli, VerifyBoundsSuitePasses) {
  const fs::path dir = fresh_dir("verify");
  const CliRun r = run_cli({"verify", "--suite", "bounds", "--out", dir.string()});
  EXPECT_EQ(r.code, cli::kExitOk) << r.out << r.err;
  EXPECT_TRUE(fs::exists(dir / "verify.json"));
}

TEST(Cli, TrainWritesOneRowPerEpochAndCheckpoint) {
  const fs::path dir = fresh_dir("train");
  const CliRun r = run_cli({"train", "--epochs", "2", "--steps", "20", "--seed", "3", "--out", dir.string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.out << r.err;
  const Csv csv = read_csv(dir / "train_seed3.csv");
  ASSERT_EQ(csv.meta.size(), 3u);
  EXPECT_EQ(csv.meta[0], std::string("# schema=") + cli::kTrainSchema);
  EXPECT_EQ(csv.meta[2], "# seed=3");
  EXPECT_EQ(csv.header.front(), "epoch");
  ASSERT_EQ(csv.rows.size(), 2u);
  EXPECT_EQ(csv.rows[1][0], "1");
  const Csv eps = read_csv(dir / "episodes_seed3.csv");
  EXPECT_EQ(eps.rows.size(), 10u);
  EXPECT_TRUE(fs::exists(dir / "checkpoint_seed3.bin"));
  EXPECT_TRUE(fs::exists(dir / "config_seed3.json"));

  // The checkpoint drives evaluation.
  const fs::path eval_dir = fresh_dir("train_eval");
  const CliRun e = run_cli({"eval-success", "--policy", "checkpoint", "--checkpoint", (dir / "checkpoint_seed3.bin").string(),
                         "--episodes", "2", "--steps", "10", "--out", eval_dir.string()});
  EXPECT_EQ(e.code, cli::kExitOk) << e.out << e.err;
  EXPECT_EQ(read_csv(eval_dir / "eval_success.csv").rows.size(), 2u);
}

TEST(Cli, AlwaysSuccessfulPolicyScoresFullRate) {
  // Thresholds wider than the workspace make every step a success.
  const fs::path dir = fresh_dir("success");
  const CliRun r = run_cli({"eval-success", "--policy", "prior-only", "--episodes", "4", "--steps", "3",
                         "--position-threshold", "100", "--orientation-threshold", "100", "--out", dir.string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.out << r.err;
  const json j = read_json_file(dir / "eval_success.json");
  EXPECT_EQ(j["success_rate"].get<double>(), 1.0);
  EXPECT_EQ(j["successes"].get<int>(), 4);

  EnvConfig cfg;
  cfg.episode_length = 3;
  cfg.reward.position_threshold = 100.0;
  cfg.reward.orientation_threshold = 100.0;
  const PolicyFn stub = [](const Env&, const Observation&) { return Action::Zero().eval(); };
  const SuccessSummary s = eval_success(cfg, stub, 5, 1);
  EXPECT_EQ(s.rate(), 1.0);
  for (const auto& e : s.details) EXPECT_EQ(e.first_success_step, 1);
}

TEST(Cli, PriorOnlySweepMassCsv) {
  const fs::path dir = fresh_dir("mass");
  const CliRun r = run_cli({"sweep-mass", "--factors", "0.5,1,2", "--episodes", "2", "--steps", "30", "--out",
                         dir.string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.out << r.err;
  const Csv csv = read_csv(dir / "sweep_mass.csv");
  EXPECT_EQ(csv.header, (std::vector<std::string>{"mass", "episode", "max_e_p", "max_e_o", "success", "initial_yaw"}));
  ASSERT_EQ(csv.rows.size(), 6u);
  std::set<double> masses;
  for (const auto& row : csv.rows) {
    ASSERT_EQ(row.size(), csv.header.size());
    masses.insert(std::stod(row[0]));
  }
  EXPECT_EQ(masses.size(), 3u);
  EXPECT_NEAR(*masses.begin(), 0.5 * kDefaultBaseMass, 1e-9);
}

TEST(Cli, PriorOnlyTrackingCsvs) {
  const fs::path dir = fresh_dir("tracking");
  const CliRun r = run_cli({"eval-tracking", "--speeds", "0,3.44", "--episodes", "1", "--steps", "15", "--out",
                         dir.string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.out << r.err;
  const Csv summary = read_csv(dir / "tracking_summary.csv");
  ASSERT_EQ(summary.rows.size(), 2u);
  EXPECT_EQ(summary.rows[1][0], "3.4399999999999999");
  const Csv traces = read_csv(dir / "tracking_traces.csv");
  EXPECT_EQ(traces.header.size(), 8u + 2 * kTotalDof);
  EXPECT_EQ(traces.rows.size(), 30u);
  EXPECT_TRUE(fs::exists(dir / "tracking.json"));
}

TEST(Cli, ExportTracesWithFixedYaw) {
  const fs::path dir = fresh_dir("traces");
  const CliRun r = run_cli({"export-traces", "--episodes", "2", "--yaw", "0.3", "--steps", "5", "--out", dir.string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.out << r.err;
  const Csv csv = read_csv(dir / "traces.csv");
  EXPECT_EQ(csv.rows.size(), 10u);
  EXPECT_EQ(csv.header.back(), "success");
}

TEST(Cli, ThreadCapDoesNotChangeResults) {
  const fs::path a = fresh_dir("threads_a"), b = fresh_dir("threads_b");
  setenv("ORBITARM_THREADS", "1", 1);
  ASSERT_EQ(run_cli({"sweep-mass", "--factors", "1", "--episodes", "3", "--steps", "10", "--out", a.string()}).code, 0);
  setenv("ORBITARM_THREADS", "4", 1);
  ASSERT_EQ(run_cli({"sweep-mass", "--factors", "1", "--episodes", "3", "--steps", "10", "--out", b.string()}).code, 0);
  unsetenv("ORBITARM_THREADS");
  EXPECT_EQ(read_csv(a / "sweep_mass.csv").rows, read_csv(b / "sweep_mass.csv").rows);
}

TEST(WorkerPool, CapAndExceptions) {
  setenv("ORBITARM_THREADS", "1", 1);
  EXPECT_EQ(worker_count(), 1);
  unsetenv("ORBITARM_THREADS");
  std::vector<int> hit(50, 0);
  parallel_for(50, [&](int i) { hit[i] += 1; }, 4);
  for (int h : hit) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, [](int i) { if (i == 7) throw std::runtime_error("x"); }, 3), std::runtime_error);
}

TEST(MeanStd, EmptyAndKnown) {
  EXPECT_EQ(mean_std({}).count, 0);
  EXPECT_TRUE(std::isnan(mean_std({}).mean));
  const MeanStd m = mean_std({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_DOUBLE_EQ(m.std, std::sqrt(1.25));
}

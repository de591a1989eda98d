// Copyright 2026 The stratclass Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "stratclass/config.hpp"
#include "stratclass/errors.hpp"
#include "stratclass/simulation.hpp"
#include "stratclass/summary.hpp"

using namespace stratclass;

namespace {

std::string error_of(const std::string& yaml) {
  try {
    parse_config_text(yaml);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string csv_of(const RunArtifacts& run) {
  std::ostringstream out;
  write_checkpoints_csv(out, run);
  return out.str();
}

ExperimentConfig small(Algorithm algorithm, long T = 2048) {
  auto c = parse_config_text("algorithm: sa_ols\nd: 2\nT: " + std::to_string(T) +
                             "\ndelta: 0.2\nsigma: 0.1\nseeds: 3\nbase_seed: 40\n");
  c.algorithm = algorithm;
  return c;
}

}  // namespace

TEST_CASE("minimal config takes defaults") {
  const auto c = parse_config_text("algorithm: sa_ols\nd: 2\nT: 4096\ndelta: 0.2\nsigma: 0.1\nseeds: 5\n");
  CHECK(c.algorithm == Algorithm::sa_ols);
  CHECK(c.feedback == Feedback::apple_tasting);
  CHECK(c.r0 == 0.0);
  CHECK(c.source.kind == SourceKind::uniform_ball);
  CHECK(c.agent.mode == TiebreakMode::lazy);
  CHECK(c.theta.random_unit);
  CHECK(c.seeds == 5);
  CHECK(c.checkpoints.front() == 1);
  CHECK(c.checkpoints.back() == 4096);
  CHECK(c.checkpoints.size() == 13);
  CHECK(c.run_id() == "sa_ols_apple_d2_T4096");
}

TEST_CASE("config validation messages") {
  CHECK(error_of("algorithm: sa_ols\ndelta: 1.5\n").find("delta must lie in [0,1)") != std::string::npos);
  CHECK(error_of("algorithm: sa_ols\ndelta: -0.1\n").find("delta must lie in [0,1)") != std::string::npos);
  CHECK(error_of("algorithm: sa_ols\nsigma: -1\n").find("sigma") != std::string::npos);
  CHECK(error_of("algorithm: sa_ols\nd: 4\nT: 7\n").find("T must be >= 2d") != std::string::npos);
  CHECK(error_of("algorithm: sa_ols\nthreads: 4\n").find("'threads'") != std::string::npos);
  CHECK(error_of("algorithm: sa_ols\nagent:\n  gama_th: 0.1\n").find("'agent.gama_th'") != std::string::npos);
  CHECK(error_of("algorithm: ucb\n").find("algorithm") != std::string::npos);
  CHECK(error_of("d: 2\n").find("algorithm") != std::string::npos);
  CHECK(error_of("algorithm: sa_ols\nfeedback: bandit\ntheta:\n  kind: explicit\n  theta1: [0.6, 0.8]\n")
            .find("theta0") != std::string::npos);
  CHECK(error_of("algorithm: sa_ols\ntheta:\n  kind: explicit\n  theta1: [1.0, 1.0]\n").find("theta1") !=
        std::string::npos);
  CHECK(error_of("algorithm: sa_ols\nT: 100\ncheckpoints: [10, 200]\n").find("checkpoint") != std::string::npos);
  CHECK(error_of("algorithm: sa_ols\nd: [1\n").find("cannot parse") != std::string::npos);
}

TEST_CASE("oversized exp3 grids are rejected with their size") {
  // eps = (6 * 0.1 * log(65536) / 65536)^(1/8) = 0.316, ceil(sqrt(6)/eps) = 8, 8^6 points.
  CHECK(error_of("algorithm: exp3_sae\nd: 6\nT: 65536\ndelta: 0.2\nsigma: 0.1\n").empty());
  const auto capped =
      error_of("algorithm: exp3_sae\nd: 6\nT: 65536\ndelta: 0.2\nsigma: 0.1\noverrides:\n  grid_cap: 100000\n");
  CHECK(capped.find("|E| = 262144") != std::string::npos);
  // d = 8: eps = 0.410, ceil(sqrt(8)/eps) = 7, 7^8 = 5764801 > 1e6.
  CHECK(error_of("algorithm: exp3_sae\nd: 8\nT: 65536\ndelta: 0.2\nsigma: 0.1\n").find("|E| = 5764801") !=
        std::string::npos);
  CHECK(error_of("algorithm: exp3_sae\nd: 2\nT: 4096\nsigma: 0\n").find("epsilon") != std::string::npos);
  CHECK(error_of("algorithm: exp3_sae\nd: 2\nT: 4096\nsigma: 0\noverrides:\n  epsilon: 0.3\n").find("lambda") !=
        std::string::npos);
  CHECK(error_of("algorithm: exp3_sae\nd: 2\nT: 4096\nsigma: 0\noverrides:\n  epsilon: 0.3\n  lambda: 0.5\n")
            .empty());
}

TEST_CASE("dotted overrides apply before validation") {
  const std::string base = "algorithm: sa_ols\nd: 2\nT: 4096\ndelta: 0.2\n";
  const auto c = parse_config_text(base, {{"T", "8192"}, {"agent.mode", "trembling"}, {"agent.gamma_th", "0.05"}});
  CHECK(c.T == 8192);
  CHECK(c.checkpoints.back() == 8192);
  CHECK(c.agent.mode == TiebreakMode::trembling);
  CHECK(c.agent.fixed_alpha == doctest::Approx(0.025));
  CHECK_THROWS_AS(parse_config_text(base, {{"delta", "2"}}), ConfigError);
}

TEST_CASE("every shipped config parses") {
  int parsed = 0;
  for (const auto& entry : std::filesystem::directory_iterator(STRATCLASS_CONFIG_DIR)) {
    if (entry.path().extension() != ".yaml") continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(parse_config(entry.path().string()));
    ++parsed;
  }
  CHECK(parsed >= 5);
}

TEST_CASE("checkpoint CSV layout and determinism") {
  const auto config = small(Algorithm::sa_ols);
  const auto a = run_experiment(config, 1);
  const auto b = run_experiment(config, 3);
  const std::string csv = csv_of(a);
  CHECK(csv == csv_of(b));
  CHECK(csv == csv_of(run_experiment(config, 2)));
  CHECK(csv.substr(0, csv.find('\n')) == kCheckpointHeader);

  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  std::uint64_t prev_seed = 0;
  long prev_t = 0;
  int rows = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    REQUIRE(cells.size() == 17);
    const auto seed = std::stoull(cells[9]);
    const long t = std::stol(cells[10]);
    CHECK((seed > prev_seed || (seed == prev_seed && t > prev_t)));
    prev_seed = seed;
    prev_t = t;
    ++rows;
  }
  CHECK(rows == 3 * static_cast<int>(config.checkpoints.size()));
  CHECK(a.trials[0].seed == 40);
  CHECK(a.trials[2].seed == 42);
}

TEST_CASE("zero-noise sa_ols run has a flat regret tail") {
  auto config = small(Algorithm::sa_ols, 4096);
  config.sigma = 0.0;
  config.seeds = 1;
  const auto run = run_experiment(config);
  const auto& rows = run.trials[0].rows;
  REQUIRE(rows.size() >= 6);
  CHECK(rows.back().cum_regret_expected == rows[rows.size() - 5].cum_regret_expected);
  CHECK(*rows.back().theta1_err <= 1e-8);
}

TEST_CASE("etc logs switch from exploration to the committed policy exactly at T0") {
  auto config = small(Algorithm::etc, 4096);
  const auto trial = run_trial(config, 5, TrialOptions{true, {}});
  const long t0 = etc_exploration_length(2, 4096, 0.1, 0.05);
  REQUIRE(trial.exploration_end == t0);
  for (const auto& log : trial.logs) {
    if (log.t <= t0) CHECK(log.policy.always_one);
    else CHECK_FALSE(log.policy.is_constant());
    if (log.t > t0 + 3) break;
  }
  CHECK(trial.logs[static_cast<std::size_t>(t0)].policy.beta ==
        trial.logs.back().policy.beta);
}

TEST_CASE("logs carry the policy snapshot and respect apple-tasting censorship") {
  for (auto fb : {Feedback::apple_tasting, Feedback::bandit}) {
    auto config = small(Algorithm::sa_ols, 1024);
    config.feedback = fb;
    const auto trial = run_trial(config, 9, TrialOptions{true, {}});
    int violations = 0;
    for (const auto& log : trial.logs) {
      if (!log.policy.is_constant() && log.policy.beta.size() != 2) ++violations;
      if (log.action != log.policy.assign(log.x_prime)) ++violations;
      const bool censored = fb == Feedback::apple_tasting && log.action == 0;
      if (censored == log.observed_reward.has_value()) ++violations;
    }
    CHECK(violations == 0);
    CHECK(trial.rows.back().theta0_err.has_value() == (fb == Feedback::bandit));
  }
}

TEST_CASE("every algorithm runs in both feedback modes") {
  for (auto algorithm : {Algorithm::sa_ols, Algorithm::etc, Algorithm::doubling, Algorithm::exp3_sae}) {
    for (auto fb : {Feedback::apple_tasting, Feedback::bandit}) {
      auto config = small(algorithm, 2048);
      config.feedback = fb;
      config.seeds = 1;
      CAPTURE(to_string(algorithm));
      const auto run = run_experiment(config);
      const auto& last = run.trials[0].rows.back();
      CHECK(last.t == 2048);
      CHECK(last.cum_regret_expected >= 0.0);
      CHECK(last.cum_regret_expected < 2048.0);
    }
  }
}

TEST_CASE("short adversarial files fail before any trial runs") {
  const auto dir = std::filesystem::temp_directory_path() / "stratclass_harness";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "ctx.csv") << "0.1,0.2\n0.3,0.4\n";
  std::ofstream(dir / "cfg.yaml") << "algorithm: sa_ols\nd: 2\nT: 10\nsource:\n  kind: adversarial_file\n"
                                     "  path: ctx.csv\n";
  const auto config = parse_config((dir / "cfg.yaml").string());
  CHECK(config.source.path == (dir / "ctx.csv").string());
  CHECK_THROWS_AS(run_experiment(config), ConfigError);
}

TEST_CASE("summaries") {
  auto config = small(Algorithm::sa_ols, 1024);
  config.seeds = 1;
  const std::vector<RunArtifacts> single{run_experiment(config)};
  const auto rows = summarize(single);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].single_seed);
  CHECK(rows[0].std_regret == 0.0);

  // Injected c*sqrt(T) curves.
  std::vector<RunArtifacts> injected;
  for (int k = 10; k <= 15; ++k) {
    RunArtifacts run;
    run.config = config;
    run.config.T = 1L << k;
    for (int s = 0; s < 3; ++s) {
      TrialResult trial;
      trial.cum_regret = 2.5 * std::sqrt(static_cast<double>(run.config.T));
      run.trials.push_back(trial);
    }
    injected.push_back(run);
  }
  const auto sweep = summarize(injected);
  CHECK(summary_slope(sweep).slope == doctest::Approx(0.5));
  std::ostringstream svg;
  write_svg_plot(svg, sweep, "injected");
  CHECK(svg.str().find("<svg") == 0);
  CHECK(svg.str().find("slope 0.500") != std::string::npos);

  injected.push_back(injected.front());
  CHECK_THROWS_AS(summarize(injected), ConfigError);
  injected.pop_back();
  injected.back().config.d = 3;
  CHECK_THROWS_AS(summarize(injected), ConfigError);
}

TEST_CASE("sweep value expansion") {
  CHECK(expand_sweep_values("1,2,3") == std::vector<std::string>{"1", "2", "3"});
  const auto v = expand_sweep_values("4096,8192,...,131072");
  REQUIRE(v.size() == 6);
  CHECK(v.back() == "131072");
  CHECK(expand_sweep_values("0.1, 0.2 ,...,0.8").size() == 4);
  CHECK_THROWS_AS(expand_sweep_values("1,...,8"), ConfigError);
}

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

// stratclass command-line front end.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "stratclass/config.hpp"
#include "stratclass/errors.hpp"
#include "stratclass/evaluation.hpp"
#include "stratclass/simulation.hpp"
#include "stratclass/summary.hpp"

namespace fs = std::filesystem;
using namespace stratclass;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitScaleGuard = 3;

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
}

int cmd_run(const std::string& config_path, const fs::path& out_dir, int threads, bool trace) {
  const auto config = parse_config(config_path);
  const auto run = run_experiment(config, threads, trace);
  ensure_dir(out_dir);
  {
    auto out = open_out(out_dir / "checkpoints.csv");
    write_checkpoints_csv(out, run);
  }
  const std::vector<RunArtifacts> runs{run};
  const auto rows = summarize(runs);
  {
    auto out = open_out(out_dir / "summary.csv");
    write_summary_csv(out, rows);
  }
  if (trace) {
    auto out = open_out(out_dir / "trace.csv");
    write_trace_csv(out, run);
  }
  const auto& r = rows.front();
  fmt::print("{}: T={} seeds={} mean regret {:.4f} (std {:.4f}){}\n", r.run_id, r.T, r.seeds, r.mean_regret,
             r.std_regret, r.single_seed ? " [single seed, no spread]" : "");
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& vary, const fs::path& out_dir, int threads) {
  const auto eq = vary.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--vary expects KEY=v1,v2,...");
  const std::string key = vary.substr(0, eq);
  const auto values = expand_sweep_values(vary.substr(eq + 1));
  if (values.empty()) throw ConfigError("--vary lists no values");

  std::vector<RunArtifacts> runs;
  for (const auto& v : values) {
    auto config = parse_config(config_path, {{key, v}});
    if (key == "T") config.checkpoints = default_checkpoints(config.T);
    else config.name = fmt::format("{}_{}{}", config.run_id(), key, v);
    runs.push_back(run_experiment(config, threads));
    fmt::print("{}={}: mean regret {:.4f}\n", key, v, summarize(std::span(&runs.back(), 1)).front().mean_regret);
  }

  ensure_dir(out_dir);
  {
    auto out = open_out(out_dir / "checkpoints.csv");
    bool header = true;
    for (const auto& run : runs) {
      write_checkpoints_csv(out, run, header);
      header = false;
    }
  }
  if (key != "T") return 0;
  const auto rows = summarize(runs);
  {
    auto out = open_out(out_dir / "summary.csv");
    write_summary_csv(out, rows);
  }
  {
    auto out = open_out(out_dir / "regret.svg");
    write_svg_plot(out, rows, fmt::format("{} regret vs T", to_string(runs.front().config.algorithm)));
  }
  if (rows.size() >= 4) {
    const auto fit = summary_slope(rows);
    fmt::print("log-log slope {:.4f} +- {:.4f} over {} horizons\n", fit.slope, fit.slope_std_error, fit.used);
    auto out = open_out(out_dir / "fit.csv");
    out << "slope,slope_std_error,intercept,used,excluded\n"
        << fmt::format("{:.12g},{:.12g},{:.12g},{},{}\n", fit.slope, fit.slope_std_error, fit.intercept, fit.used,
                       fit.excluded);
  }
  return 0;
}

int cmd_constants(int d, double delta, long samples, std::uint64_t seed, int threads, const fs::path& out_path) {
  if (d < 1) throw ConfigError("--d must be >= 1");
  if (!(delta >= 0.0 && delta < 1.0)) throw ConfigError("delta must lie in [0,1)");
  if (samples < 1000) throw ConfigError("--samples must be >= 1000");
  const auto report = constants_report(d, delta, samples, seed, threads);
  auto mc = [](const MonteCarloEstimate& e) {
    return nlohmann::json{{"mean", e.mean}, {"std_error", e.std_error}, {"samples", e.samples}, {"hits", e.hits}};
  };
  nlohmann::json j{{"d", report.d},
                   {"delta", report.delta},
                   {"samples", report.samples},
                   {"seed", seed},
                   {"c1", mc(report.c1)},
                   {"c1_lower_bound", report.c1_lower_bound},
                   {"c2", mc(report.c2)},
                   {"c2_lower_bound", report.c2_lower_bound}};
  if (out_path.has_parent_path()) ensure_dir(out_path.parent_path());
  auto out = open_out(out_path);
  out << j.dump(2) << '\n';
  fmt::print("c1 = {:.5f} +- {:.5f} (bound {:.5f}); c2 = {:.5f} +- {:.5f} (bound {:.5f})\n", report.c1.mean,
             report.c1.std_error, report.c1_lower_bound, report.c2.mean, report.c2.std_error, report.c2_lower_bound);
  return 0;
}

int cmd_oracle(const std::string& config_path, int slopes, int intercepts) {
  const auto config = parse_config(config_path);
  if (config.d > 3 || config.T > 10'000)
    throw ScaleGuardError(fmt::format("oracle needs d <= 3 and T <= 10000 (d = {}, T = {})", config.d, config.T));
  const OracleGrid grid{slopes, intercepts};
  const double slack = oracle_grid_slack(grid, config.delta) * static_cast<double>(config.T);
  AgentBehavior behavior = config.agent;
  behavior.delta = config.delta;
  bool all_hold = true;
  fmt::print("seed,oracle_value,algorithm_value,stackelberg_regret,strategic_regret,slack,holds\n");
  for (int i = 0; i < config.seeds; ++i) {
    const auto trial = run_trial(config, trial_seed(config, i), TrialOptions{true, {}});
    Rng rng = derive_rng(trial.seed, 0x0a);
    const auto best = stackelberg_oracle(trial.model, behavior, trial.contexts, grid, rng);
    double earned = 0.0;
    for (const auto& log : trial.logs) earned += expected_reward(trial.model, log.action, log.x);
    const double stackelberg = best.value - earned;
    const double strategic = cumulative_strategic_regret(trial.logs);
    const bool holds = stackelberg <= strategic + slack;
    all_hold = all_hold && holds;
    fmt::print("{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{}\n", trial.seed, best.value, earned, stackelberg, strategic,
               slack, holds ? 1 : 0);
  }
  return all_hold ? 0 : 1;
}

int cmd_inconsistency(const std::string& config_path, int threads) {
  const auto config = parse_config(config_path);
  const auto rows = ols_inconsistency_demo(config, threads);
  std::vector<double> clean, all;
  fmt::print("seed,clean_only_error,all_data_error,clean_samples,all_samples\n");
  for (const auto& r : rows) {
    fmt::print("{},{:.6f},{:.6f},{},{}\n", r.seed, r.clean_only_error, r.all_data_error, r.clean_samples,
               r.all_samples);
    clean.push_back(r.clean_only_error);
    all.push_back(r.all_data_error);
  }
  fmt::print("median clean-only {:.6f}, median all-data {:.6f}\n", median(clean), median(all));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Strategic classification simulation lab"};
  app.require_subcommand(1);

  std::string config_path, vary, out;
  int threads = 1;
  bool trace = false;

  auto* run = app.add_subcommand("run", "simulate every seed of one configuration");
  run->add_option("--config", config_path, "YAML config")->required();
  run->add_option("--out", out, "output directory")->required();
  run->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  run->add_flag("--trace", trace, "also write per-round trace.csv");

  auto* sweep = app.add_subcommand("sweep", "repeat a run over a list of values for one key");
  sweep->add_option("--config", config_path, "YAML config")->required();
  sweep->add_option("--vary", vary, "KEY=v1,v2,... (a,b,...,z continues geometrically)")->required();
  sweep->add_option("--out", out, "output directory")->required();
  sweep->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

  int d = 2;
  double delta = 0.0;
  long samples = 1'000'000;
  std::uint64_t seed = 0;
  auto* constants = app.add_subcommand("constants", "Monte-Carlo c1/c2 with closed-form lower bounds");
  constants->add_option("--d", d)->required();
  constants->add_option("--delta", delta)->required();
  constants->add_option("--samples", samples);
  constants->add_option("--seed", seed);
  constants->add_option("--threads", threads)->check(CLI::PositiveNumber);
  constants->add_option("--out", out, "JSON report path")->required();

  int slopes = 720, intercepts = 64;
  auto* oracle = app.add_subcommand("oracle", "brute-force Stackelberg benchmark (d <= 3, T <= 1e4)");
  oracle->add_option("--config", config_path)->required();
  oracle->add_option("--grid", slopes, "slope count")->check(CLI::PositiveNumber);
  oracle->add_option("--intercepts", intercepts)->check(CLI::Range(2, 100000));

  auto* demo = app.add_subcommand("demo-inconsistency", "clean-only vs all-data regression error");
  demo->add_option("--config", config_path)->required();
  demo->add_option("--threads", threads)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run) return cmd_run(config_path, out, threads, trace);
    if (*sweep) return cmd_sweep(config_path, vary, out, threads);
    if (*constants) return cmd_constants(d, delta, samples, seed, threads, out);
    if (*oracle) return cmd_oracle(config_path, slopes, intercepts);
    if (*demo) return cmd_inconsistency(config_path, threads);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ScaleGuardError& e) {
    std::cerr << "scale guard: " << e.what() << '\n';
    return kExitScaleGuard;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

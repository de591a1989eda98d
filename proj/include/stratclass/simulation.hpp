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

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "stratclass/algorithms.hpp"
#include "stratclass/config.hpp"
#include "stratclass/evaluation.hpp"

namespace stratclass {

inline constexpr std::string_view kCheckpointHeader =
    "run_id,algorithm,feedback,d,T,delta,sigma,r0,source,seed,t,cum_regret_expected,"
    "cum_reward_realized,theta1_err,theta0_err,clean_count,lambda_min_ratio";

struct CheckpointRow {
  std::uint64_t seed = 0;
  long t = 0;
  double cum_regret_expected = 0.0;
  double cum_reward_realized = 0.0;
  std::optional<double> theta1_err;
  std::optional<double> theta0_err;
  long clean_count = 0;
  double lambda_min_ratio = 0.0;
};

struct TrialOptions {
  bool keep_logs = false;
  std::function<void(const RoundLog&)> on_round;
};

struct TrialResult {
  std::uint64_t seed = 0;
  RewardModel model;
  std::vector<CheckpointRow> rows;
  std::vector<RoundLog> logs;  // only with keep_logs
  std::vector<Vec> contexts;   // original contexts, only with keep_logs
  double cum_regret = 0.0;
  long clean_count = 0;
  long fallbacks = 0;
  std::optional<Vec> theta1_hat;
  std::optional<Vec> theta0_hat;
  std::optional<long> exploration_end;  // etc
  std::vector<long> epochs;             // doubling
  std::optional<long> switch_round;     // doubling
};

struct RunArtifacts {
  ExperimentConfig config;
  std::vector<TrialResult> trials;  // ordered by seed index
};

/// seed_i = base_seed + i.
std::uint64_t trial_seed(const ExperimentConfig& config, int index);

RewardModel make_reward_model(const ExperimentConfig& config, std::uint64_t seed);
LearnerSettings learner_settings(const ExperimentConfig& config);
std::unique_ptr<Principal> make_principal(const ExperimentConfig& config, std::uint64_t seed);

/// One simulated horizon. Randomness comes from independent streams derived
/// from `seed`, so the result does not depend on thread scheduling.
TrialResult run_trial(const ExperimentConfig& config, std::uint64_t seed, const TrialOptions& options = {});

/// Validates file-backed sources, then runs every seed on up to `threads`
/// workers. Output order is by seed index.
RunArtifacts run_experiment(const ExperimentConfig& config, int threads = 1, bool keep_logs = false);

void write_checkpoints_csv(std::ostream& out, const RunArtifacts& run, bool header = true);
/// Per-round trace: seed,t,x,x_prime,action,optimal_action,clean,reward,inst_regret.
void write_trace_csv(std::ostream& out, const RunArtifacts& run);

struct InconsistencyTrial {
  std::uint64_t seed = 0;
  double clean_only_error = 0.0;  // ||theta1_hat - theta1|| from clean data
  double all_data_error = 0.0;    // same regression over every accepted (x', r)
  long clean_samples = 0;
  long all_samples = 0;
};

/// Runs strategy-aware OLS and, alongside it, a naive fit on all accepted
/// reports. Requires apple-tasting feedback.
std::vector<InconsistencyTrial> ols_inconsistency_demo(const ExperimentConfig& config, int threads = 1);

double median(std::vector<double> values);

}  // namespace stratclass

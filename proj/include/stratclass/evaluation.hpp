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
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "stratclass/agent.hpp"
#include "stratclass/environment.hpp"

namespace stratclass {

/// One round of the interaction, in protocol order.
struct RoundLog {
  long t = 0;
  Vec x;        // original context
  Vec x_prime;  // reported context
  LinearThresholdPolicy policy;
  int action = 0;
  int optimal_action = 0;
  bool clean = false;
  std::optional<double> observed_reward;
  double realized_reward = 0.0;
  double inst_regret = 0.0;
};

/// Benchmark action on the truthful context; ties go to action 1.
int optimal_action(const RewardModel& model, const Vec& x);

/// Expected-value regret of playing `action` on the truthful context x.
double instantaneous_regret(const RewardModel& model, int action, const Vec& x);

double cumulative_strategic_regret(std::span<const RoundLog> logs);

/// Fraction of rounds flagged clean; 0 for an empty log.
double clean_fraction(std::span<const RoundLog> logs);

/// (t, lambda_min(sum_{s<=t} x_s x_s^T 1{clean_s}) / t) at each checkpoint;
/// powers of two up to the log length when `checkpoints` is empty.
std::vector<std::pair<long, double>> min_eigen_track(std::span<const RoundLog> logs,
                                                      std::span<const long> checkpoints = {});

struct OracleGrid {
  int slopes = 720;
  int intercepts = 64;
};

struct OracleResult {
  double value = 0.0;  // best cumulative expected reward
  Vec beta;
  double tau = 0.0;
};

/// Unit slopes used by the oracle: +-1 for d=1, evenly spaced angles for d=2,
/// a Fibonacci lattice on the sphere for d=3. One slope per column.
Mat oracle_slopes(int d, int count);

/// Best fixed shifted-linear policy in hindsight when every context
/// best-responds to it. Brute force over slopes x intercepts in [-1-delta, 1+delta];
/// guarded to d <= 3 and at most 1e4 contexts (ScaleGuardError otherwise).
OracleResult stackelberg_oracle(const RewardModel& model, const AgentBehavior& behavior,
                                std::span<const Vec> contexts, OracleGrid grid, Rng& rng);

/// Worst-case per-round reward lost to the oracle's discretization.
double oracle_grid_slack(const OracleGrid& grid, double delta);

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long samples = 0;
  long hits = 0;  // samples satisfying the conditioning event
};

/// P(x[1] >= delta) for x uniform on the unit d-ball, with binomial standard error.
MonteCarloEstimate estimate_c1(int d, double delta, long n_samples, std::uint64_t seed, int threads = 1);
/// E[x[2]^2 | x[1] >= delta]; InsufficientSamplesError below `min_hits` conditioned samples.
MonteCarloEstimate estimate_c2(int d, double delta, long n_samples, std::uint64_t seed,
                               int threads = 1, long min_hits = 1000);

/// Hyperspherical-cap volume bound
/// (1-delta)^{(d+1)/2} / (sqrt(pi) (d+1)) * Gamma(d/2+1) / Gamma(d/2+1/2).
double c1_lower_bound(int d, double delta);
/// (1/(3d)) (3/4 - delta/2 - delta^2/4)^3.
double c2_lower_bound(int d, double delta);

struct ConstantsReport {
  int d = 0;
  double delta = 0.0;
  long samples = 0;
  MonteCarloEstimate c1;
  double c1_lower_bound = 0.0;
  MonteCarloEstimate c2;
  double c2_lower_bound = 0.0;
};

ConstantsReport constants_report(int d, double delta, long n_samples, std::uint64_t seed, int threads = 1);

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_std_error = 0.0;
  int used = 0;
  int excluded = 0;  // points dropped for a nonpositive coordinate
};

/// Least-squares slope of log(regret) against log(T).
ScalingFit fit_scaling_exponent(std::span<const std::pair<double, double>> points);

}  // namespace stratclass

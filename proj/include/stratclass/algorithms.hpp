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
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "stratclass/agent.hpp"
#include "stratclass/environment.hpp"
#include "stratclass/linalg.hpp"

namespace stratclass {

/// What every principal knows up front.
struct LearnerSettings {
  int d = 2;
  long horizon = 1;
  double delta = 0.0;
  double r0 = 0.0;
  double sigma = 0.0;
  Feedback feedback = Feedback::apple_tasting;
  // Trembling-hand cap; raises the clean threshold to (delta + gamma_th).
  double gamma_th = 0.0;
};

/// Online learner over shifted linear threshold policies. Each round the
/// harness calls choose_policy, lets the agent respond, then observe.
class Principal {
 public:
  virtual ~Principal() = default;

  virtual std::string_view name() const = 0;
  virtual LinearThresholdPolicy choose_policy(long t) = 0;
  /// `reward` must be present iff action == 1 (apple tasting) or always
  /// (bandit); otherwise ProtocolError.
  virtual void observe(const Vec& x_prime, int action, std::optional<double> reward) = 0;

  virtual std::optional<Vec> theta1_estimate() const { return std::nullopt; }
  virtual std::optional<Vec> theta0_estimate() const { return std::nullopt; }
  /// Rounds where a zero-norm slope forced the accept-all fallback.
  virtual long fallback_count() const { return 0; }
};

/// Contexts (row-major, one per row) with their rewards and the round they
/// were recorded in.
class RegressionData {
 public:
  explicit RegressionData(int d) : d_(d) {}

  void push(const Vec& x, double reward, long round);
  std::size_t size() const { return rewards_.size(); }
  int dim() const { return d_; }
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> contexts() const;
  const std::vector<double>& rewards() const { return rewards_; }
  const std::vector<long>& rounds() const { return rounds_; }
  std::vector<Sample> samples() const;

 private:
  int d_;
  std::vector<double> xs_;
  std::vector<double> rewards_;
  std::vector<long> rounds_;
};

void check_feedback(Feedback feedback, int action, const std::optional<double>& reward);

/// Greedy OLS on clean contexts behind a delta-shifted boundary.
class StrategyAwareOls final : public Principal {
 public:
  explicit StrategyAwareOls(LearnerSettings settings);

  std::string_view name() const override { return "sa_ols"; }
  LinearThresholdPolicy choose_policy(long t) override;
  void observe(const Vec& x_prime, int action, std::optional<double> reward) override;

  std::optional<Vec> theta1_estimate() const override { return estimate1_; }
  std::optional<Vec> theta0_estimate() const override;
  long fallback_count() const override { return fallbacks_; }

  const RegressionData& data1() const { return data1_; }
  const RegressionData& data0() const { return data0_; }
  /// Whether the last observed round was added to the action-1 data.
  bool last_inserted() const { return last_inserted_; }

 private:
  void refresh();

  LearnerSettings settings_;
  RegressionData data1_, data0_;
  OlsAccumulator<double> acc1_, acc0_;
  Vec estimate1_, estimate0_;
  LinearThresholdPolicy current_;
  long t_ = 0;
  long fallbacks_ = 0;
  bool last_inserted_ = false;
};

/// T0 rounds of forced exploration (apple tasting: clamp of the closed form
/// to [2d, T]).
long etc_exploration_length(int d, long horizon, double sigma, double gamma_fail);

enum class EtcPhase { explore, commit };

/// Explore-then-commit: accept everyone for T0 rounds (plus T0 forced
/// rejections under bandit feedback), fit OLS once, then deploy the shifted
/// policy for the rest of the horizon.
class ExploreThenCommit final : public Principal {
 public:
  ExploreThenCommit(LearnerSettings settings, double gamma_fail,
                    std::optional<long> exploration_override = std::nullopt);

  std::string_view name() const override { return "etc"; }
  LinearThresholdPolicy choose_policy(long t) override;
  void observe(const Vec& x_prime, int action, std::optional<double> reward) override;

  std::optional<Vec> theta1_estimate() const override { return estimate1_; }
  std::optional<Vec> theta0_estimate() const override;
  long fallback_count() const override { return fallbacks_; }

  long exploration_length() const { return t0_; }
  /// Last round of forced exploration (T0, or min(2 T0, T) with bandit feedback).
  long exploration_end() const { return explore_end_; }
  EtcPhase phase() const { return phase_; }

 private:
  void commit();

  LearnerSettings settings_;
  long t0_;
  long explore_end_;
  EtcPhase phase_ = EtcPhase::explore;
  OlsAccumulator<double> acc1_, acc0_;
  Vec estimate1_, estimate0_;
  LinearThresholdPolicy current_;
  LinearThresholdPolicy committed_;
  long t_ = 0;
  long fallbacks_ = 0;
};

/// Crossover of the sqrt(T) and T^{2/3} regret bounds: min(T, ceil(d^9 (1-delta)^{-3d})).
long doubling_switch_time(int d, double delta, long horizon);

/// Explore-then-commit restarted on doubling horizons 2, 4, 8, ... (failure
/// probability 1/tau_i^2) until the cumulative budget would reach tau*, then
/// strategy-aware OLS for the remaining rounds.
class DoublingHybrid final : public Principal {
 public:
  DoublingHybrid(LearnerSettings settings, std::optional<long> tau_star_override = std::nullopt);

  std::string_view name() const override { return "doubling"; }
  LinearThresholdPolicy choose_policy(long t) override;
  void observe(const Vec& x_prime, int action, std::optional<double> reward) override;

  std::optional<Vec> theta1_estimate() const override { return inner_->theta1_estimate(); }
  std::optional<Vec> theta0_estimate() const override { return inner_->theta0_estimate(); }
  long fallback_count() const override;

  long tau_star() const { return tau_star_; }
  /// Horizons of the explore-then-commit epochs started so far.
  const std::vector<long>& epoch_lengths() const { return epochs_; }
  /// First global round handled by strategy-aware OLS, if the switch happened.
  std::optional<long> switch_round() const { return switch_round_; }

 private:
  void start_epoch(long first_round);

  LearnerSettings settings_;
  long tau_star_;
  std::unique_ptr<Principal> inner_;
  std::vector<long> epochs_;
  long epoch_start_ = 1;  // global round of local round 1
  long epoch_budget_ = 0;
  long t_ = 0;
  long finished_fallbacks_ = 0;
  std::optional<long> switch_round_;
};

/// Axis-aligned grid over [-1,1]^d with pitch 2*eps/sqrt(d): every unit vector
/// is within eps of a grid point. One slope per column.
std::size_t policy_grid_size(int d, double epsilon);
Mat build_policy_grid(int d, double epsilon, std::size_t cap = 1'000'000);

struct Exp3Parameters {
  double epsilon = 0;
  double eta = 0;
  double gamma = 0;
  double lambda = 0;
};

/// Default grid pitch (d sigma log T / T)^{1/(d+2)}, capped at 1.
double exp3_default_epsilon(int d, long horizon, double sigma);
/// eta = sqrt(log|E| / (T lambda^2 |E|)), gamma = min(1, 2 eta lambda |E|);
/// lambda defaults to sigma sqrt(2 log T).
Exp3Parameters exp3_parameters(long horizon, double sigma, std::size_t grid_size,
                               double epsilon, std::optional<double> lambda_override = std::nullopt);

/// Exponential weights over grid slopes; only the played expert's loss is
/// updated, via the importance-weighted estimator (1 + lambda - r) / q.
class Exp3Sae final : public Principal {
 public:
  Exp3Sae(LearnerSettings settings, Mat grid, Exp3Parameters params, std::uint64_t seed);

  std::string_view name() const override { return "exp3_sae"; }
  LinearThresholdPolicy choose_policy(long t) override;
  void observe(const Vec& x_prime, int action, std::optional<double> reward) override;
  long fallback_count() const override { return fallbacks_; }

  const Mat& grid() const { return grid_; }
  const Exp3Parameters& parameters() const { return params_; }
  const Vec& probabilities() const { return p_; }
  /// Sampling distribution (1 - gamma) p + gamma / |E|.
  Vec sampling_distribution() const;
  double sampling_probability(Eigen::Index e) const;
  Eigen::Index sample_expert(Rng& rng) const;
  /// Importance-weighted loss of `expert` when `chosen` was played and paid `reward`.
  double loss_estimate(Eigen::Index expert, Eigen::Index chosen, double reward) const;
  Eigen::Index last_expert() const { return chosen_; }
  LinearThresholdPolicy policy_for(Eigen::Index e) const;
  /// Replaces the weights (renormalized); test hook for fixed starting points.
  void set_probabilities(const Vec& p);

 private:
  LearnerSettings settings_;
  Mat grid_;
  Exp3Parameters params_;
  Vec p_;
  Rng rng_;
  Eigen::Index chosen_ = -1;
  LinearThresholdPolicy current_;
  long fallbacks_ = 0;
};

}  // namespace stratclass

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

#include "stratclass/algorithms.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "stratclass/errors.hpp"

namespace stratclass {
namespace {

double boundary_offset(const LearnerSettings& s) {
  return s.feedback == Feedback::apple_tasting ? s.r0 : 0.0;
}

}  // namespace

void RegressionData::push(const Vec& x, double reward, long round) {
  if (x.size() != d_) throw std::invalid_argument("RegressionData: dimension mismatch");
  xs_.insert(xs_.end(), x.data(), x.data() + d_);
  rewards_.push_back(reward);
  rounds_.push_back(round);
}

Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
RegressionData::contexts() const {
  return {xs_.data(), static_cast<Eigen::Index>(size()), d_};
}

std::vector<Sample> RegressionData::samples() const {
  std::vector<Sample> out;
  out.reserve(size());
  const auto xs = contexts();
  for (std::size_t i = 0; i < size(); ++i)
    out.push_back({xs.row(static_cast<Eigen::Index>(i)).transpose(), rewards_[i]});
  return out;
}

void check_feedback(Feedback feedback, int action, const std::optional<double>& reward) {
  if (action != 0 && action != 1) throw ProtocolError(fmt::format("invalid action {}", action));
  if (feedback == Feedback::bandit) {
    if (!reward) throw ProtocolError("bandit feedback: reward missing");
    return;
  }
  if (action == 1 && !reward) throw ProtocolError("apple tasting: reward missing for action 1");
  if (action == 0 && reward) throw ProtocolError("apple tasting: no reward is revealed for action 0");
}

// --- strategy-aware OLS -----------------------------------------------------

StrategyAwareOls::StrategyAwareOls(LearnerSettings settings)
    : settings_(settings),
      data1_(settings.d),
      data0_(settings.d),
      acc1_(settings.d),
      acc0_(settings.d),
      estimate1_(Vec::Zero(settings.d)),
      estimate0_(Vec::Zero(settings.d)),
      current_(LinearThresholdPolicy::accept_all(settings.d)) {
  if (settings.d < 1) throw std::invalid_argument("dimension must be >= 1");
}

std::optional<Vec> StrategyAwareOls::theta0_estimate() const {
  if (settings_.feedback != Feedback::bandit) return std::nullopt;
  return estimate0_;
}

LinearThresholdPolicy StrategyAwareOls::choose_policy(long t) {
  t_ = t;
  const int d = settings_.d;
  if (t <= d) {
    current_ = LinearThresholdPolicy::accept_all(d);
  } else if (settings_.feedback == Feedback::bandit && t <= 2L * d) {
    current_ = LinearThresholdPolicy::reject_all(d);
  } else {
    Vec beta = settings_.feedback == Feedback::bandit ? Vec(estimate1_ - estimate0_) : estimate1_;
    if (beta.norm() == 0.0) {
      ++fallbacks_;
      current_ = LinearThresholdPolicy::accept_all(d);
    } else {
      current_ = LinearThresholdPolicy::shifted(std::move(beta), settings_.delta,
                                                boundary_offset(settings_));
    }
  }
  return current_;
}

void StrategyAwareOls::observe(const Vec& x_prime, int action, std::optional<double> reward) {
  check_feedback(settings_.feedback, action, reward);
  last_inserted_ = false;
  bool touched0 = false;
  if (action == 1 && is_clean(current_, x_prime, settings_.delta, settings_.gamma_th,
                              boundary_offset(settings_))) {
    data1_.push(x_prime, *reward, t_);
    acc1_.add(x_prime, *reward);
    last_inserted_ = true;
  } else if (action == 0 && settings_.feedback == Feedback::bandit) {
    // Nobody moves to be rejected, so every action-0 report is truthful.
    data0_.push(x_prime, *reward, t_);
    acc0_.add(x_prime, *reward);
    touched0 = true;
  }
  if (last_inserted_ || touched0) refresh();
}

void StrategyAwareOls::refresh() {
  estimate1_ = acc1_.solve();
  if (settings_.feedback == Feedback::bandit) estimate0_ = acc0_.solve();
}

// --- explore-then-commit ----------------------------------------------------

long etc_exploration_length(int d, long horizon, double sigma, double gamma_fail) {
  if (horizon < 1) throw std::invalid_argument("etc_exploration_length: horizon must be >= 1");
  if (sigma < 0.0) throw std::invalid_argument("etc_exploration_length: sigma must be >= 0");
  if (!(gamma_fail > 0.0 && gamma_fail < 1.0))
    throw std::invalid_argument("etc_exploration_length: gamma_fail must lie in (0,1)");
  const double raw = 4.0 * std::cbrt(63.0) * std::pow(sigma, 2.0 / 3.0) * d *
                     std::pow(static_cast<double>(horizon), 2.0 / 3.0) *
                     std::cbrt(std::log(4.0 * d / gamma_fail));
  long len = horizon;
  if (std::isfinite(raw) && raw < static_cast<double>(horizon)) len = static_cast<long>(std::ceil(raw));
  len = std::max(len, 2L * d);
  return std::min(len, horizon);
}

ExploreThenCommit::ExploreThenCommit(LearnerSettings settings, double gamma_fail,
                                     std::optional<long> exploration_override)
    : settings_(settings),
      t0_(exploration_override ? std::clamp(*exploration_override, 1L, settings.horizon)
                               : etc_exploration_length(settings.d, settings.horizon,
                                                        settings.sigma, gamma_fail)),
      explore_end_(settings.feedback == Feedback::bandit ? std::min(2 * t0_, settings.horizon) : t0_),
      acc1_(settings.d),
      acc0_(settings.d),
      estimate1_(Vec::Zero(settings.d)),
      estimate0_(Vec::Zero(settings.d)),
      current_(LinearThresholdPolicy::accept_all(settings.d)),
      committed_(LinearThresholdPolicy::accept_all(settings.d)) {}

std::optional<Vec> ExploreThenCommit::theta0_estimate() const {
  if (settings_.feedback != Feedback::bandit) return std::nullopt;
  return estimate0_;
}

LinearThresholdPolicy ExploreThenCommit::choose_policy(long t) {
  t_ = t;
  if (t <= t0_) {
    current_ = LinearThresholdPolicy::accept_all(settings_.d);
  } else if (t <= explore_end_) {
    current_ = LinearThresholdPolicy::reject_all(settings_.d);
  } else {
    if (phase_ == EtcPhase::explore) commit();
    if (committed_.always_one) ++fallbacks_;
    current_ = committed_;
  }
  return current_;
}

void ExploreThenCommit::observe(const Vec& x_prime, int action, std::optional<double> reward) {
  check_feedback(settings_.feedback, action, reward);
  if (phase_ != EtcPhase::explore) return;
  if (current_.always_one) acc1_.add(x_prime, *reward);
  else if (current_.always_zero) acc0_.add(x_prime, *reward);
}

void ExploreThenCommit::commit() {
  phase_ = EtcPhase::commit;
  estimate1_ = acc1_.solve();
  if (settings_.feedback == Feedback::bandit) estimate0_ = acc0_.solve();
  Vec beta = settings_.feedback == Feedback::bandit ? Vec(estimate1_ - estimate0_) : estimate1_;
  if (beta.norm() == 0.0)
    committed_ = LinearThresholdPolicy::accept_all(settings_.d);
  else
    committed_ = LinearThresholdPolicy::shifted(std::move(beta), settings_.delta,
                                                boundary_offset(settings_));
}

// --- doubling hybrid ------------------------------------------------------

long doubling_switch_time(int d, double delta, long horizon) {
  if (d < 1) throw std::invalid_argument("doubling_switch_time: d must be >= 1");
  if (!(delta >= 0.0 && delta < 1.0))
    throw std::invalid_argument("doubling_switch_time: delta must lie in [0,1)");
  if (horizon < 1) throw std::invalid_argument("doubling_switch_time: horizon must be >= 1");
  const double log_value = 9.0 * std::log(static_cast<double>(d)) - 3.0 * d * std::log1p(-delta);
  if (log_value > std::log(static_cast<double>(horizon)) + 1.0) return horizon;
  const double value = std::ceil(std::pow(static_cast<double>(d), 9.0) * std::pow(1.0 - delta, -3.0 * d));
  if (!std::isfinite(value) || value >= static_cast<double>(horizon)) return horizon;
  return std::max(1L, static_cast<long>(value));
}

DoublingHybrid::DoublingHybrid(LearnerSettings settings, std::optional<long> tau_star_override)
    : settings_(settings),
      tau_star_(tau_star_override ? *tau_star_override
                                  : doubling_switch_time(settings.d, settings.delta, settings.horizon)) {
  start_epoch(1);
}

void DoublingHybrid::start_epoch(long first_round) {
  if (inner_) finished_fallbacks_ += inner_->fallback_count();
  const long next = epochs_.empty() ? 2 : 2 * epochs_.back();
  const long budget = std::accumulate(epochs_.begin(), epochs_.end(), 0L) + next;
  epoch_start_ = first_round;
  if (budget < tau_star_) {
    epochs_.push_back(next);
    epoch_budget_ = next;
    LearnerSettings epoch = settings_;
    epoch.horizon = next;
    const double gamma_fail = 1.0 / (static_cast<double>(next) * static_cast<double>(next));
    inner_ = std::make_unique<ExploreThenCommit>(epoch, gamma_fail);
  } else {
    LearnerSettings rest = settings_;
    rest.horizon = std::max(1L, settings_.horizon - first_round + 1);
    inner_ = std::make_unique<StrategyAwareOls>(rest);
    switch_round_ = first_round;
    epoch_budget_ = std::numeric_limits<long>::max();
  }
}

long DoublingHybrid::fallback_count() const { return finished_fallbacks_ + inner_->fallback_count(); }

LinearThresholdPolicy DoublingHybrid::choose_policy(long t) {
  t_ = t;
  return inner_->choose_policy(t - epoch_start_ + 1);
}

void DoublingHybrid::observe(const Vec& x_prime, int action, std::optional<double> reward) {
  inner_->observe(x_prime, action, reward);
  if (!switch_round_ && t_ - epoch_start_ + 1 >= epoch_budget_) start_epoch(t_ + 1);
}

// --- EXP3 with strategy-aware experts ---------------------------------------

std::size_t policy_grid_size(int d, double epsilon) {
  if (d < 1) throw std::invalid_argument("policy grid: d must be >= 1");
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ConfigError("policy grid: epsilon must lie in (0,1]");
  const double per_axis = std::ceil(std::sqrt(static_cast<double>(d)) / epsilon - 1e-9);
  const double total = std::pow(per_axis, d);
  if (total >= 1e18) return std::numeric_limits<std::size_t>::max();
  return static_cast<std::size_t>(std::llround(total));
}

Mat build_policy_grid(int d, double epsilon, std::size_t cap) {
  const std::size_t size = policy_grid_size(d, epsilon);
  if (size > cap) {
    const std::string shown = size == std::numeric_limits<std::size_t>::max() ? std::string(">= 1e18")
                                                                              : std::to_string(size);
    throw ConfigError(fmt::format("policy grid has |E| = {} points, exceeding the cap of {}", shown, cap));
  }
  const double h = 2.0 * epsilon / std::sqrt(static_cast<double>(d));
  const long per_axis = std::lround(std::ceil(std::sqrt(static_cast<double>(d)) / epsilon - 1e-9));
  Mat grid(d, static_cast<Eigen::Index>(size));
  std::vector<long> digits(static_cast<std::size_t>(d), 0);
  for (Eigen::Index col = 0; col < grid.cols(); ++col) {
    for (int k = 0; k < d; ++k) grid(k, col) = -1.0 + h / 2.0 + static_cast<double>(digits[k]) * h;
    for (int k = 0; k < d; ++k) {
      if (++digits[k] < per_axis) break;
      digits[k] = 0;
    }
  }
  return grid;
}

double exp3_default_epsilon(int d, long horizon, double sigma) {
  const double T = static_cast<double>(horizon);
  const double base = d * sigma * std::log(T) / T;
  if (!(base > 0.0)) return 0.0;
  return std::min(1.0, std::pow(base, 1.0 / (d + 2.0)));
}

Exp3Parameters exp3_parameters(long horizon, double sigma, std::size_t grid_size, double epsilon,
                               std::optional<double> lambda_override) {
  if (grid_size == 0) throw ConfigError("exp3: empty policy grid");
  Exp3Parameters p;
  p.epsilon = epsilon;
  const double T = static_cast<double>(horizon);
  p.lambda = lambda_override ? *lambda_override : sigma * std::sqrt(2.0 * std::log(T));
  if (!(p.lambda > 0.0)) throw ConfigError("exp3: lambda must be > 0 (set sigma > 0 or overrides.lambda)");
  const double n = static_cast<double>(grid_size);
  p.eta = std::sqrt(std::log(n) / (T * p.lambda * p.lambda * n));
  p.gamma = std::min(1.0, 2.0 * p.eta * p.lambda * n);
  return p;
}

Exp3Sae::Exp3Sae(LearnerSettings settings, Mat grid, Exp3Parameters params, std::uint64_t seed)
    : settings_(settings),
      grid_(std::move(grid)),
      params_(params),
      p_(Vec::Constant(grid_.cols(), 1.0 / static_cast<double>(grid_.cols()))),
      rng_(derive_rng(seed, 0xe3)),
      current_(LinearThresholdPolicy::accept_all(settings.d)) {
  if (grid_.cols() == 0 || grid_.rows() != settings.d) throw std::invalid_argument("exp3: bad grid shape");
}

double Exp3Sae::sampling_probability(Eigen::Index e) const {
  return (1.0 - params_.gamma) * p_(e) + params_.gamma / static_cast<double>(p_.size());
}

Vec Exp3Sae::sampling_distribution() const {
  return ((1.0 - params_.gamma) * p_.array() + params_.gamma / static_cast<double>(p_.size())).matrix();
}

Eigen::Index Exp3Sae::sample_expert(Rng& rng) const {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  Eigen::Index last_positive = 0;
  for (Eigen::Index e = 0; e < p_.size(); ++e) {
    const double q = sampling_probability(e);
    if (q <= 0.0) continue;
    last_positive = e;
    acc += q;
    if (u < acc) return e;
  }
  return last_positive;
}

double Exp3Sae::loss_estimate(Eigen::Index expert, Eigen::Index chosen, double reward) const {
  if (expert != chosen) return 0.0;
  return (1.0 + params_.lambda - reward) / sampling_probability(expert);
}

LinearThresholdPolicy Exp3Sae::policy_for(Eigen::Index e) const {
  Vec beta = grid_.col(e);
  if (beta.norm() == 0.0) return LinearThresholdPolicy::accept_all(settings_.d);
  return LinearThresholdPolicy::shifted(std::move(beta), settings_.delta, boundary_offset(settings_));
}

LinearThresholdPolicy Exp3Sae::choose_policy(long /*t*/) {
  chosen_ = sample_expert(rng_);
  current_ = policy_for(chosen_);
  if (current_.always_one) ++fallbacks_;
  return current_;
}

void Exp3Sae::observe(const Vec& /*x_prime*/, int action, std::optional<double> reward) {
  check_feedback(settings_.feedback, action, reward);
  if (chosen_ < 0) throw ProtocolError("exp3: observe called before choose_policy");
  const double r = reward ? *reward : settings_.r0;
  const double loss = loss_estimate(chosen_, chosen_, r);
  const double old = p_(chosen_);
  const double updated = old * std::exp(-params_.eta * loss);
  const double total = 1.0 - old + updated;
  if (!std::isfinite(updated) || !(total > 0.0)) return;
  p_(chosen_) = updated;
  p_ /= p_.sum();
}

void Exp3Sae::set_probabilities(const Vec& p) {
  if (p.size() != p_.size() || (p.array() < 0.0).any() || !(p.sum() > 0.0))
    throw std::invalid_argument("exp3: probabilities must be nonnegative with positive mass");
  p_ = p / p.sum();
}

}  // namespace stratclass

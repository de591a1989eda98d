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

#include "stratclass/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

#include "stratclass/errors.hpp"

namespace stratclass {
namespace {

enum Stream : std::uint64_t { kTheta = 1, kContext = 2, kAgent = 3, kNoise = 4, kPrincipal = 5 };

std::string fmt_num(double v) { return fmt::format("{:.12g}", v); }

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt_num(*v) : std::string(); }

template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::uint64_t trial_seed(const ExperimentConfig& config, int index) {
  return config.base_seed + static_cast<std::uint64_t>(index);
}

RewardModel make_reward_model(const ExperimentConfig& c, std::uint64_t seed) {
  RewardModel model;
  model.r0 = c.r0;
  model.sigma = c.sigma;
  model.feedback = c.feedback;
  if (c.theta.random_unit) {
    Rng rng = derive_rng(seed, kTheta);
    model.theta1 = random_unit_vector(c.d, rng);
    if (c.feedback == Feedback::bandit) model.theta0 = random_unit_vector(c.d, rng);
  } else {
    model.theta1 = c.theta.theta1;
    if (c.feedback == Feedback::bandit) model.theta0 = c.theta.theta0;
  }
  model.validate();
  return model;
}

LearnerSettings learner_settings(const ExperimentConfig& c) {
  LearnerSettings s;
  s.d = c.d;
  s.horizon = c.T;
  s.delta = c.delta;
  s.r0 = c.r0;
  s.sigma = c.sigma;
  s.feedback = c.feedback;
  s.gamma_th = c.agent.mode == TiebreakMode::trembling ? c.agent.gamma_th : 0.0;
  return s;
}

std::unique_ptr<Principal> make_principal(const ExperimentConfig& c, std::uint64_t seed) {
  const LearnerSettings s = learner_settings(c);
  switch (c.algorithm) {
    case Algorithm::sa_ols:
      return std::make_unique<StrategyAwareOls>(s);
    case Algorithm::etc:
      return std::make_unique<ExploreThenCommit>(s, c.gamma_fail, c.overrides.exploration_length);
    case Algorithm::doubling:
      return std::make_unique<DoublingHybrid>(s, c.overrides.tau_star);
    case Algorithm::exp3_sae: {
      const double eps = c.overrides.epsilon.value_or(exp3_default_epsilon(c.d, c.T, c.sigma));
      Mat grid = build_policy_grid(c.d, eps, c.overrides.grid_cap);
      const auto params = exp3_parameters(c.T, c.sigma, static_cast<std::size_t>(grid.cols()), eps,
                                          c.overrides.lambda);
      return std::make_unique<Exp3Sae>(s, std::move(grid), params, seed ^ (kPrincipal << 56));
    }
  }
  throw ConfigError("unknown algorithm");
}

TrialResult run_trial(const ExperimentConfig& c, std::uint64_t seed, const TrialOptions& options) {
  TrialResult result;
  result.seed = seed;
  result.model = make_reward_model(c, seed);
  const RewardModel& model = result.model;

  Rng context_rng = derive_rng(seed, kContext);
  Rng agent_rng = derive_rng(seed, kAgent);
  Rng noise_rng = derive_rng(seed, kNoise);
  ContextSourceSpec spec = c.source;
  spec.d = c.d;
  ContextSource source(spec, c.T);
  auto principal = make_principal(c, seed);
  const NoiseModel noise{c.sigma, c.noise};
  AgentBehavior behavior = c.agent;
  behavior.delta = c.delta;
  const LearnerSettings settings = learner_settings(c);
  const double clean_shift = c.feedback == Feedback::apple_tasting ? c.r0 : 0.0;
  const bool apple = c.feedback == Feedback::apple_tasting;

  Mat clean_gram = Mat::Zero(c.d, c.d);
  double cum_regret = 0.0, cum_reward = 0.0;
  long clean_count = 0;
  std::size_t next_checkpoint = 0;
  if (options.keep_logs) {
    result.logs.reserve(static_cast<std::size_t>(c.T));
    result.contexts.reserve(static_cast<std::size_t>(c.T));
  }

  for (long t = 1; t <= c.T; ++t) {
    const LinearThresholdPolicy policy = principal->choose_policy(t);
    auto x = source.next(context_rng);
    if (!x) throw ConfigError(fmt::format("context source exhausted at round {}", t));
    Vec x_prime = best_respond(policy, *x, behavior, agent_rng);
    const int action = policy.assign(x_prime);
    const double realized = realize_reward(model, action, *x, noise, noise_rng);
    const std::optional<double> observed =
        (apple && action == 0) ? std::nullopt : std::optional<double>(realized);
    const bool clean = action == 1 && is_clean(policy, x_prime, settings.delta, settings.gamma_th, clean_shift);
    principal->observe(x_prime, action, observed);

    const double regret = instantaneous_regret(model, action, *x);
    cum_regret += regret;
    cum_reward += realized;
    if (clean) {
      ++clean_count;
      clean_gram.noalias() += *x * x->transpose();
    }

    if (options.keep_logs || options.on_round) {
      RoundLog log{t, *x, x_prime, policy, action, optimal_action(model, *x), clean, observed, realized, regret};
      if (options.on_round) options.on_round(log);
      if (options.keep_logs) {
        result.contexts.push_back(*x);
        result.logs.push_back(std::move(log));
      }
    }

    while (next_checkpoint < c.checkpoints.size() && c.checkpoints[next_checkpoint] == t) {
      CheckpointRow row;
      row.seed = seed;
      row.t = t;
      row.cum_regret_expected = cum_regret;
      row.cum_reward_realized = cum_reward;
      if (auto th = principal->theta1_estimate(); th && th->size() == c.d)
        row.theta1_err = (*th - model.theta1).norm();
      if (model.theta0)
        if (auto th = principal->theta0_estimate(); th && th->size() == c.d)
          row.theta0_err = (*th - *model.theta0).norm();
      row.clean_count = clean_count;
      row.lambda_min_ratio = clean_count > 0 ? min_eigenvalue(clean_gram) / static_cast<double>(t) : 0.0;
      result.rows.push_back(row);
      ++next_checkpoint;
    }
  }

  result.cum_regret = cum_regret;
  result.clean_count = clean_count;
  result.fallbacks = principal->fallback_count();
  result.theta1_hat = principal->theta1_estimate();
  result.theta0_hat = principal->theta0_estimate();
  if (auto* etc = dynamic_cast<ExploreThenCommit*>(principal.get())) result.exploration_end = etc->exploration_end();
  if (auto* dbl = dynamic_cast<DoublingHybrid*>(principal.get())) {
    result.epochs = dbl->epoch_lengths();
    result.switch_round = dbl->switch_round();
  }
  return result;
}

RunArtifacts run_experiment(const ExperimentConfig& config, int threads, bool keep_logs) {
  validate_config(config);
  if (config.source.kind == SourceKind::adversarial_file)
    load_adversarial_contexts(config.source.path, config.d, config.T);

  RunArtifacts run;
  run.config = config;
  run.trials.resize(static_cast<std::size_t>(config.seeds));
  TrialOptions options;
  options.keep_logs = keep_logs;
  parallel_for(config.seeds, threads, [&](int i) {
    run.trials[static_cast<std::size_t>(i)] = run_trial(config, trial_seed(config, i), options);
  });
  return run;
}

void write_checkpoints_csv(std::ostream& out, const RunArtifacts& run, bool header) {
  const auto& c = run.config;
  if (header) out << kCheckpointHeader << '\n';
  const std::string prefix =
      fmt::format("{},{},{},{},{},{},{},{},{}", c.run_id(), to_string(c.algorithm), to_string(c.feedback), c.d,
                  c.T, fmt_num(c.delta), fmt_num(c.sigma), fmt_num(c.r0), to_string(c.source.kind));
  for (const auto& trial : run.trials) {
    for (const auto& row : trial.rows) {
      out << fmt::format("{},{},{},{},{},{},{},{},{}\n", prefix, row.seed, row.t, fmt_num(row.cum_regret_expected),
                         fmt_num(row.cum_reward_realized), fmt_opt(row.theta1_err), fmt_opt(row.theta0_err),
                         row.clean_count, fmt_num(row.lambda_min_ratio));
    }
  }
}

void write_trace_csv(std::ostream& out, const RunArtifacts& run) {
  const int d = run.config.d;
  out << "seed,t";
  for (int j = 0; j < d; ++j) out << ",x" << j;
  for (int j = 0; j < d; ++j) out << ",xp" << j;
  out << ",action,optimal_action,clean,reward,inst_regret\n";
  for (const auto& trial : run.trials) {
    for (const auto& log : trial.logs) {
      out << trial.seed << ',' << log.t;
      for (int j = 0; j < d; ++j) out << ',' << fmt_num(log.x(j));
      for (int j = 0; j < d; ++j) out << ',' << fmt_num(log.x_prime(j));
      out << ',' << log.action << ',' << log.optimal_action << ',' << (log.clean ? 1 : 0) << ','
          << fmt_opt(log.observed_reward) << ',' << fmt_num(log.inst_regret) << '\n';
    }
  }
}

std::vector<InconsistencyTrial> ols_inconsistency_demo(const ExperimentConfig& input, int threads) {
  ExperimentConfig config = input;
  config.algorithm = Algorithm::sa_ols;
  if (config.feedback != Feedback::apple_tasting)
    throw ConfigError("demo-inconsistency needs apple-tasting feedback");
  validate_config(config);
  if (config.source.kind == SourceKind::adversarial_file)
    load_adversarial_contexts(config.source.path, config.d, config.T);

  std::vector<InconsistencyTrial> out(static_cast<std::size_t>(config.seeds));
  parallel_for(config.seeds, threads, [&](int i) {
    OlsAccumulator<double> all(config.d);
    TrialOptions options;
    options.on_round = [&](const RoundLog& log) {
      if (log.action == 1 && log.observed_reward) all.add(log.x_prime, *log.observed_reward);
    };
    const auto trial = run_trial(config, trial_seed(config, i), options);
    InconsistencyTrial row;
    row.seed = trial.seed;
    row.clean_only_error = trial.theta1_hat ? (*trial.theta1_hat - trial.model.theta1).norm()
                                            : trial.model.theta1.norm();
    row.all_data_error = (all.solve() - trial.model.theta1).norm();
    row.clean_samples = trial.clean_count;
    row.all_samples = static_cast<long>(all.count());
    out[static_cast<std::size_t>(i)] = row;
  });
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<long>(mid), values.end());
  double m = values[mid];
  if (values.size() % 2 == 0) {
    m = (m + *std::max_element(values.begin(), values.begin() + static_cast<long>(mid))) / 2.0;
  }
  return m;
}

}  // namespace stratclass

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

#include "stratclass/evaluation.hpp"

#include <cmath>
#include <future>
#include <numbers>

#include <fmt/format.h>

#include "stratclass/errors.hpp"
#include "stratclass/linalg.hpp"

namespace stratclass {
namespace {

constexpr int kMonteCarloChunks = 16;

struct ChunkTotals {
  long samples = 0;
  long hits = 0;
  double sum = 0.0;
  double sum_sq = 0.0;
};

// Splits n over a fixed number of chunks with derived seeds, so the result
// does not depend on the thread count.
template <typename Body>
ChunkTotals run_chunks(long n, std::uint64_t seed, int threads, Body body) {
  std::vector<ChunkTotals> parts(kMonteCarloChunks);
  auto work = [&](int chunk) {
    const long begin = n * chunk / kMonteCarloChunks;
    const long end = n * (chunk + 1) / kMonteCarloChunks;
    Rng rng = derive_rng(seed, 0xc0ffee00u + static_cast<std::uint64_t>(chunk));
    ChunkTotals& out = parts[static_cast<std::size_t>(chunk)];
    for (long i = begin; i < end; ++i) body(rng, out);
    out.samples = end - begin;
  };
  if (threads <= 1) {
    for (int c = 0; c < kMonteCarloChunks; ++c) work(c);
  } else {
    std::vector<std::future<void>> pending;
    for (int c = 0; c < kMonteCarloChunks; ++c) pending.push_back(std::async(std::launch::async, work, c));
    for (auto& f : pending) f.get();
  }
  ChunkTotals total;
  for (const auto& p : parts) {
    total.samples += p.samples;
    total.hits += p.hits;
    total.sum += p.sum;
    total.sum_sq += p.sum_sq;
  }
  return total;
}

}  // namespace

int optimal_action(const RewardModel& model, const Vec& x) {
  if (model.feedback == Feedback::bandit) return (model.theta1 - *model.theta0).dot(x) >= 0.0 ? 1 : 0;
  return model.theta1.dot(x) >= model.r0 ? 1 : 0;
}

double instantaneous_regret(const RewardModel& model, int action, const Vec& x) {
  const int best = optimal_action(model, x);
  if (best == action) return 0.0;
  return expected_reward(model, best, x) - expected_reward(model, action, x);
}

double cumulative_strategic_regret(std::span<const RoundLog> logs) {
  double total = 0.0;
  for (const auto& log : logs) total += log.inst_regret;
  return total;
}

double clean_fraction(std::span<const RoundLog> logs) {
  if (logs.empty()) return 0.0;
  long clean = 0;
  for (const auto& log : logs) clean += log.clean ? 1 : 0;
  return static_cast<double>(clean) / static_cast<double>(logs.size());
}

std::vector<std::pair<long, double>> min_eigen_track(std::span<const RoundLog> logs,
                                                      std::span<const long> checkpoints) {
  std::vector<long> marks(checkpoints.begin(), checkpoints.end());
  if (marks.empty())
    for (long t = 1; t <= static_cast<long>(logs.size()); t *= 2) marks.push_back(t);
  std::vector<std::pair<long, double>> out;
  if (logs.empty()) return out;
  const auto d = logs.front().x.size();
  Mat gram = Mat::Zero(d, d);
  std::size_t next = 0;
  for (std::size_t i = 0; i < logs.size() && next < marks.size(); ++i) {
    if (logs[i].clean) gram.noalias() += logs[i].x * logs[i].x.transpose();
    const long t = static_cast<long>(i) + 1;
    while (next < marks.size() && marks[next] == t) {
      out.emplace_back(t, min_eigenvalue(gram) / static_cast<double>(t));
      ++next;
    }
  }
  return out;
}

Mat oracle_slopes(int d, int count) {
  if (d == 1) {
    Mat s(1, 2);
    s << -1.0, 1.0;
    return s;
  }
  if (count < 1) throw std::invalid_argument("oracle_slopes: count must be >= 1");
  Mat s(d, count);
  if (d == 2) {
    for (int k = 0; k < count; ++k) {
      const double a = 2.0 * std::numbers::pi * k / count;
      s(0, k) = std::cos(a);
      s(1, k) = std::sin(a);
    }
    return s;
  }
  if (d == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < count; ++k) {
      const double z = 1.0 - 2.0 * (k + 0.5) / count;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      s(0, k) = r * std::cos(golden * k);
      s(1, k) = r * std::sin(golden * k);
      s(2, k) = z;
    }
    return s;
  }
  throw ScaleGuardError(fmt::format("stackelberg oracle supports d <= 3, got d = {}", d));
}

double oracle_grid_slack(const OracleGrid& grid, double delta) {
  const double angular = 2.0 * std::numbers::pi / std::max(1, grid.slopes);
  const double intercept = 2.0 * (1.0 + delta) / std::max(1, grid.intercepts - 1);
  return angular + intercept;
}

OracleResult stackelberg_oracle(const RewardModel& model, const AgentBehavior& behavior,
                                std::span<const Vec> contexts, OracleGrid grid, Rng& rng) {
  const int d = model.dim();
  if (d > 3) throw ScaleGuardError(fmt::format("stackelberg oracle supports d <= 3, got d = {}", d));
  if (contexts.size() > 10'000)
    throw ScaleGuardError(fmt::format("stackelberg oracle supports T <= 1e4, got T = {}", contexts.size()));
  if (grid.intercepts < 2) throw ConfigError("stackelberg oracle needs at least 2 intercepts");
  const Mat slopes = oracle_slopes(d, grid.slopes);
  const double lo = -1.0 - behavior.delta;
  const double hi = 1.0 + behavior.delta;

  OracleResult best;
  best.value = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < slopes.cols(); ++k) {
    for (int j = 0; j < grid.intercepts; ++j) {
      LinearThresholdPolicy policy{slopes.col(k), lo + (hi - lo) * j / (grid.intercepts - 1), false, false};
      double total = 0.0;
      for (const Vec& x : contexts) {
        const Vec reported = best_respond(policy, x, behavior, rng);
        total += expected_reward(model, policy.assign(reported), x);
      }
      if (total > best.value) {
        best.value = total;
        best.beta = policy.beta;
        best.tau = policy.tau;
      }
    }
  }
  return best;
}

MonteCarloEstimate estimate_c1(int d, double delta, long n_samples, std::uint64_t seed, int threads) {
  if (n_samples < 1000) throw std::invalid_argument("estimate_c1: need at least 1000 samples");
  const ChunkTotals t = run_chunks(n_samples, seed, threads, [&](Rng& rng, ChunkTotals& out) {
    if (sample_uniform_ball(d, rng)(0) >= delta) ++out.hits;
  });
  MonteCarloEstimate est;
  est.samples = t.samples;
  est.hits = t.hits;
  est.mean = static_cast<double>(t.hits) / static_cast<double>(t.samples);
  est.std_error = std::sqrt(est.mean * (1.0 - est.mean) / static_cast<double>(t.samples));
  return est;
}

MonteCarloEstimate estimate_c2(int d, double delta, long n_samples, std::uint64_t seed, int threads,
                               long min_hits) {
  if (d < 2) throw std::invalid_argument("estimate_c2: needs d >= 2");
  if (n_samples < 1000) throw std::invalid_argument("estimate_c2: need at least 1000 samples");
  const ChunkTotals t = run_chunks(n_samples, seed, threads, [&](Rng& rng, ChunkTotals& out) {
    const Vec x = sample_uniform_ball(d, rng);
    if (x(0) < delta) return;
    const double v = x(1) * x(1);
    ++out.hits;
    out.sum += v;
    out.sum_sq += v * v;
  });
  if (t.hits < min_hits)
    throw InsufficientSamplesError(fmt::format(
        "estimate_c2: only {} of {} samples satisfy x[1] >= {}, need {}", t.hits, t.samples, delta, min_hits));
  MonteCarloEstimate est;
  est.samples = t.samples;
  est.hits = t.hits;
  const double n = static_cast<double>(t.hits);
  est.mean = t.sum / n;
  const double var = std::max(0.0, (t.sum_sq - n * est.mean * est.mean) / (n - 1.0));
  est.std_error = std::sqrt(var / n);
  return est;
}

double c1_lower_bound(int d, double delta) {
  if (d < 1) throw std::invalid_argument("c1_lower_bound: d must be >= 1");
  if (!(delta >= 0.0 && delta <= 1.0)) throw std::invalid_argument("c1_lower_bound: delta must lie in [0,1]");
  if (delta == 1.0) return 0.0;
  const double log_bound = 0.5 * (d + 1) * std::log1p(-delta) - 0.5 * std::log(std::numbers::pi) -
                           std::log(d + 1.0) + std::lgamma(d / 2.0 + 1.0) - std::lgamma(d / 2.0 + 0.5);
  return std::exp(log_bound);
}

double c2_lower_bound(int d, double delta) {
  if (d < 1) throw std::invalid_argument("c2_lower_bound: d must be >= 1");
  const double inner = 0.75 - 0.5 * delta - 0.25 * delta * delta;
  return inner * inner * inner / (3.0 * d);
}

ConstantsReport constants_report(int d, double delta, long n_samples, std::uint64_t seed, int threads) {
  ConstantsReport r;
  r.d = d;
  r.delta = delta;
  r.samples = n_samples;
  r.c1 = estimate_c1(d, delta, n_samples, seed, threads);
  r.c1_lower_bound = c1_lower_bound(d, delta);
  r.c2 = estimate_c2(d, delta, n_samples, seed + 1, threads);
  r.c2_lower_bound = c2_lower_bound(d, delta);
  return r;
}

ScalingFit fit_scaling_exponent(std::span<const std::pair<double, double>> points) {
  std::vector<std::pair<double, double>> logs;
  ScalingFit fit;
  for (const auto& [T, regret] : points) {
    if (!(T > 0.0) || !(regret > 0.0)) {
      ++fit.excluded;
      continue;
    }
    logs.emplace_back(std::log(T), std::log(regret));
  }
  fit.used = static_cast<int>(logs.size());
  if (fit.used < 4)
    throw std::invalid_argument(fmt::format("fit_scaling_exponent: need >= 4 positive points, have {}", fit.used));
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : logs) {
    mx += x;
    my += y;
  }
  mx /= fit.used;
  my /= fit.used;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : logs) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_scaling_exponent: all T values coincide");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (const auto& [x, y] : logs) {
    const double r = y - fit.intercept - fit.slope * x;
    ssr += r * r;
  }
  fit.slope_std_error = std::sqrt(ssr / (fit.used - 2) / sxx);
  return fit;
}

}  // namespace stratclass

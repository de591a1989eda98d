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

#include <cstring>

#include "generators.hpp"
#include "stratclass/agent.hpp"
#include "stratclass/simulation.hpp"

using namespace stratclass;
using namespace stratclass::testing;

namespace {

AgentBehavior lazy(double delta) {
  AgentBehavior b;
  b.delta = delta;
  return b;
}

bool bit_identical(const Vec& a, const Vec& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

}  // namespace

TEST_CASE("lazy best response examples") {
  const LinearThresholdPolicy p{Vec::Unit(2, 0), 0.3};
  Rng rng = derive_rng(0, 0);
  const Vec moved = best_respond(p, Eigen::Vector2d(0.1, 0.0), lazy(0.3), rng);
  CHECK(moved(0) == doctest::Approx(0.3));
  CHECK(moved(1) == 0.0);
  CHECK(p.assign(moved) == 1);
  CHECK(best_respond(p, Eigen::Vector2d(-0.1, 0.0), lazy(0.3), rng) == Eigen::Vector2d(-0.1, 0.0));
  CHECK(best_respond(p, Eigen::Vector2d(0.5, 0.2), lazy(0.3), rng) == Eigen::Vector2d(0.5, 0.2));
}

TEST_CASE("constant policies never move anyone; zero slopes are refused") {
  Rng rng = derive_rng(0, 0);
  const Vec x = Eigen::Vector2d(-0.9, 0.1);
  CHECK(best_respond(LinearThresholdPolicy::accept_all(2), x, lazy(0.5), rng) == x);
  CHECK(best_respond(LinearThresholdPolicy::reject_all(2), x, lazy(0.5), rng) == x);
  CHECK(LinearThresholdPolicy::accept_all(2).assign(x) == 1);
  CHECK(LinearThresholdPolicy::reject_all(2).assign(x) == 0);
  const LinearThresholdPolicy zero{Vec::Zero(2), 0.1};
  CHECK_THROWS_AS(best_respond(zero, x, lazy(0.5), rng), PolicyError);
}

TEST_CASE("shifted policies put tau at delta*||beta|| + offset") {
  const auto p = LinearThresholdPolicy::shifted(Eigen::Vector2d(0.6, 0.8), 0.2, 0.05);
  CHECK(p.tau == doctest::Approx(0.25));
  const auto q = LinearThresholdPolicy::shifted(Eigen::Vector2d(3.0, 4.0), 0.1, 0.0);
  CHECK(q.tau == doctest::Approx(0.5));
}

TEST_CASE("is_clean examples") {
  const LinearThresholdPolicy p{Vec::Unit(2, 0), 0.3};
  CHECK(is_clean(p, Eigen::Vector2d(0.5, 0.0), 0.2, 0.0, 0.1));
  CHECK_FALSE(is_clean(p, Eigen::Vector2d(0.3, 0.0), 0.2, 0.0, 0.1));
  CHECK_FALSE(is_clean(p, Eigen::Vector2d(0.35, 0.0), 0.2, 0.1, 0.1));
  CHECK(is_clean(LinearThresholdPolicy::accept_all(2), Vec::Zero(2), 0.2, 0.0, 0.0));
  CHECK_FALSE(is_clean(LinearThresholdPolicy::reject_all(2), Vec::Zero(2), 0.2, 0.0, 0.0));
}

TEST_CASE("trembling overshoot follows its rule and cap") {
  const LinearThresholdPolicy p{Vec::Unit(2, 0), 0.3};
  AgentBehavior b = lazy(0.3);
  b.mode = TiebreakMode::trembling;
  b.gamma_th = 0.05;
  Rng rng = derive_rng(0, 0);
  const Vec x = Eigen::Vector2d(0.1, 0.0);  // gap 0.2, slack 0.1, cap 0.05

  b.alpha_rule = AlphaRule::adversarial_max;
  CHECK(best_respond(p, x, b, rng)(0) == doctest::Approx(0.35));
  b.alpha_rule = AlphaRule::fixed;
  b.fixed_alpha = 0.02;
  CHECK(best_respond(p, x, b, rng)(0) == doctest::Approx(0.32));
  b.fixed_alpha = 0.5;
  CHECK(best_respond(p, x, b, rng)(0) == doctest::Approx(0.35));
  b.alpha_rule = AlphaRule::uniform_random;
  for (int i = 0; i < 200; ++i) {
    const double v = best_respond(p, x, b, rng)(0);
    CHECK(v >= 0.3 - 1e-12);
    CHECK(v <= 0.35 + 1e-12);
  }
  // Budget binds before gamma_th: gap 0.28 leaves 0.02.
  b.alpha_rule = AlphaRule::adversarial_max;
  CHECK(best_respond(p, Eigen::Vector2d(0.02, 0.0), b, rng)(0) == doctest::Approx(0.32));
}

TEST_CASE("clip_to_ball keeps reports in the ball or leaves the agent put") {
  const LinearThresholdPolicy p{Vec::Unit(2, 0), 0.99};
  AgentBehavior b = lazy(0.5);
  b.clip_to_ball = true;
  Rng rng = derive_rng(0, 0);
  const Vec x = Eigen::Vector2d(0.6, 0.7);
  const Vec moved = best_respond(p, x, b, rng);
  CHECK(moved.norm() <= 1 + 1e-12);
  CHECK((moved == x || p.assign(moved) == 1));
}

TEST_CASE("property: budget, direction, lazy exactness, indifference laziness") {
  int budget = 0, direction = 0, exactness = 0, indifference = 0, alpha = 0, accepted = 0;
  for (int c = 0; c < 10000; ++c) {
    Rng rng = case_rng(301, c);
    const int d = uniform_int(rng, 1, 8);
    const auto policy = random_policy(d, rng);
    const auto behavior = random_behavior(rng);
    const Vec x = random_context(policy, behavior.delta, rng);
    const Vec moved = best_respond(policy, x, behavior, rng);
    const Vec step = moved - x;
    const Vec u = policy.beta / policy.beta.norm();

    if (step.norm() > behavior.delta + 1e-12) ++budget;
    if ((step - step.dot(u) * u).norm() > 1e-12) ++direction;
    if (moved != x) {
      const double overshoot = (policy.score(moved) - policy.tau) / policy.beta.norm();
      if (behavior.mode == TiebreakMode::lazy && std::abs(policy.score(moved) - policy.tau) > 1e-9) ++exactness;
      const double gap = (policy.tau - policy.score(x)) / policy.beta.norm();
      const double cap = std::min(behavior.delta - gap, behavior.gamma_th);
      if (overshoot < -1e-12 || overshoot > std::max(cap, 0.0) + 1e-9) ++alpha;
      if (policy.assign(moved) != 1) ++accepted;
    }
    // Moving is only ever done to flip the action.
    if (policy.assign(moved) == policy.assign(x) && moved != x) ++indifference;
  }
  CHECK(budget == 0);
  CHECK(direction == 0);
  CHECK(exactness == 0);
  CHECK(indifference == 0);
  CHECK(alpha == 0);
  CHECK(accepted == 0);
}

TEST_CASE("property: reachable reports are never clean") {
  int violations = 0;
  for (int c = 0; c < 10000; ++c) {
    Rng rng = case_rng(302, c);
    const int d = uniform_int(rng, 1, 6);
    const auto behavior = random_behavior(rng);
    const double r0 = uniform(rng, -0.5, 0.5);
    Vec beta = random_unit_vector(d, rng) * uniform(rng, 0.1, 2.0);
    const auto policy = LinearThresholdPolicy::shifted(beta, behavior.delta, r0);
    const Vec x = random_context(policy, behavior.delta, rng);
    const Vec moved = best_respond(policy, x, behavior, rng);
    const double gamma = behavior.mode == TiebreakMode::trembling ? behavior.gamma_th : 0.0;
    if (is_clean(policy, moved, behavior.delta, gamma, r0) && !bit_identical(moved, x)) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("property: clean reports in full simulations are the original contexts") {
  int violations = 0, clean_rounds = 0;
  const AlphaRule rules[] = {AlphaRule::fixed, AlphaRule::uniform_random, AlphaRule::adversarial_max};
  for (int c = 0; c < 12; ++c) {
    ExperimentConfig config;
    config.algorithm = (c % 3 == 2) ? Algorithm::etc : Algorithm::sa_ols;
    config.feedback = (c % 4 == 3) ? Feedback::bandit : Feedback::apple_tasting;
    config.d = 2 + c % 3;
    config.T = 3000;
    config.delta = 0.1 + 0.05 * (c % 5);
    config.sigma = 0.1;
    config.r0 = config.feedback == Feedback::apple_tasting ? 0.05 * (c % 3) : 0.0;
    config.checkpoints = default_checkpoints(config.T);
    config.agent.mode = c < 4 ? TiebreakMode::lazy : TiebreakMode::trembling;
    config.agent.gamma_th = 0.05;
    config.agent.alpha_rule = rules[c % 3];
    config.agent.fixed_alpha = 0.03;
    const auto trial = run_trial(config, 700 + c, TrialOptions{true, {}});
    for (const auto& log : trial.logs) {
      if (!log.clean) continue;
      ++clean_rounds;
      if (!bit_identical(log.x, log.x_prime)) ++violations;
    }
  }
  CHECK(clean_rounds > 10000);
  CHECK(violations == 0);
}

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

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "stratclass/errors.hpp"
#include "stratclass/linalg.hpp"

namespace stratclass {

/// Assigns action 1 iff <beta, x'> >= tau, unless one of the constant modes is
/// set. always_one covers bootstrap and exploration rounds; always_zero the
/// forced action-0 rounds of bandit feedback.
template <typename Scalar>
struct BasicThresholdPolicy {
  VectorX<Scalar> beta;
  Scalar tau = Scalar(0);
  bool always_one = false;
  bool always_zero = false;

  static BasicThresholdPolicy accept_all(Eigen::Index d) {
    return {VectorX<Scalar>::Zero(d), Scalar(0), true, false};
  }
  static BasicThresholdPolicy reject_all(Eigen::Index d) {
    return {VectorX<Scalar>::Zero(d), Scalar(0), false, true};
  }
  /// Boundary raised by delta * ||beta|| above `offset` so that no agent with
  /// <beta, x> < offset can reach it.
  static BasicThresholdPolicy shifted(VectorX<Scalar> beta, Scalar delta, Scalar offset) {
    const Scalar tau = delta * beta.norm() + offset;
    return {std::move(beta), tau, false, false};
  }

  bool is_constant() const { return always_one || always_zero; }

  template <typename Derived>
  Scalar score(const Eigen::MatrixBase<Derived>& x) const {
    return beta.dot(x);
  }

  template <typename Derived>
  int assign(const Eigen::MatrixBase<Derived>& x) const {
    if (always_one) return 1;
    if (always_zero) return 0;
    return score(x) >= tau ? 1 : 0;
  }
};
using LinearThresholdPolicy = BasicThresholdPolicy<double>;

enum class TiebreakMode { lazy, trembling };
enum class AlphaRule { fixed, uniform_random, adversarial_max };

struct AgentBehavior {
  double delta = 0.0;
  TiebreakMode mode = TiebreakMode::lazy;
  double gamma_th = 0.0;
  AlphaRule alpha_rule = AlphaRule::uniform_random;
  double fixed_alpha = 0.0;
  // Renormalize x' onto the unit ball; an agent whose clipped report no
  // longer earns action 1 stays put.
  bool clip_to_ball = false;
};

namespace detail {

template <typename Scalar, typename Urbg>
Scalar overshoot(const AgentBehavior& behavior, Scalar cap, Urbg& rng) {
  if (behavior.mode == TiebreakMode::lazy || cap <= Scalar(0)) return Scalar(0);
  switch (behavior.alpha_rule) {
    case AlphaRule::fixed:
      return std::clamp(Scalar(behavior.fixed_alpha), Scalar(0), cap);
    case AlphaRule::uniform_random:
      return std::uniform_real_distribution<Scalar>(Scalar(0), cap)(rng);
    case AlphaRule::adversarial_max:
      return cap;
  }
  return Scalar(0);
}

}  // namespace detail

/// Strategic agent's report against a committed threshold policy: move along
/// beta/||beta|| just far enough to reach the boundary (plus a trembling-hand
/// overshoot) if the l2 budget allows, otherwise report truthfully.
template <typename Scalar, typename Derived, typename Urbg>
VectorX<Scalar> best_respond(const BasicThresholdPolicy<Scalar>& policy,
                             const Eigen::MatrixBase<Derived>& x,
                             const AgentBehavior& behavior, Urbg& rng) {
  VectorX<Scalar> original = x;
  if (policy.is_constant()) return original;
  const Scalar norm = policy.beta.norm();
  if (norm == Scalar(0)) throw PolicyError("best_respond: zero slope has no direction");
  const Scalar s = policy.score(original);
  if (s >= policy.tau) return original;
  const Scalar delta = Scalar(behavior.delta);
  const Scalar gap = (policy.tau - s) / norm;
  if (gap > delta) return original;

  const VectorX<Scalar> dir = policy.beta / norm;
  // Lazy step, widened in units of the score's rounding error until the
  // rounded score actually clears tau.
  const Scalar unit = std::numeric_limits<Scalar>::epsilon() *
                      (std::abs(policy.tau) + std::abs(s) + Scalar(1)) / norm;
  Scalar step = gap;
  VectorX<Scalar> moved = original + step * dir;
  for (int widen = 0; policy.score(moved) < policy.tau && widen < 64; ++widen) {
    step = gap + unit * std::ldexp(Scalar(1), widen);
    moved = original + step * dir;
  }
  if (policy.score(moved) < policy.tau || step > delta) return original;

  const Scalar cap = std::min(delta - step, Scalar(behavior.gamma_th));
  const Scalar alpha = detail::overshoot(behavior, cap, rng);
  if (alpha > Scalar(0)) moved = original + (step + alpha) * dir;

  if (behavior.clip_to_ball) {
    const Scalar n = moved.norm();
    if (n > Scalar(1)) moved /= n;
    if (policy.assign(moved) != 1) return original;
  }
  return moved;
}

/// Margin added to the clean threshold so boundary points that were nudged by
/// a few ulps never register as clean.
template <typename Scalar>
Scalar clean_margin(Scalar threshold) {
  return Scalar(1e-12) * (Scalar(1) + std::abs(threshold));
}

/// True iff x' lies strictly above (delta + gamma_th) * ||beta|| + r0_shift,
/// which no best-responding agent can reach by moving.
template <typename Scalar, typename Derived>
bool is_clean(const BasicThresholdPolicy<Scalar>& policy, const Eigen::MatrixBase<Derived>& x_prime,
              Scalar delta, Scalar gamma_th, Scalar r0_shift) {
  if (policy.always_one) return true;
  if (policy.always_zero) return false;
  const Scalar threshold = (delta + gamma_th) * policy.beta.norm() + r0_shift;
  return policy.score(x_prime) > threshold + clean_margin(threshold);
}

}  // namespace stratclass

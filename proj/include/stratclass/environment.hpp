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
#include <random>
#include <string>
#include <vector>

#include "stratclass/linalg.hpp"

namespace stratclass {

using Rng = std::mt19937_64;

/// Independent generator for stream `stream` of trial `seed`.
Rng derive_rng(std::uint64_t seed, std::uint64_t stream);

enum class Feedback { apple_tasting, bandit };

/// Ground-truth linear rewards. Apple tasting: action 0 pays the constant r0.
/// Bandit: action 0 pays <theta0, x> + noise.
struct RewardModel {
  Vec theta1;
  std::optional<Vec> theta0;
  double r0 = 0.0;
  double sigma = 0.0;
  Feedback feedback = Feedback::apple_tasting;

  int dim() const { return static_cast<int>(theta1.size()); }
  /// Throws std::invalid_argument when the mode/theta0 pairing or norms are off.
  void validate() const;
};

enum class NoiseKind { gaussian, bounded_uniform };

struct NoiseModel {
  double sigma = 0.0;
  NoiseKind kind = NoiseKind::gaussian;

  double draw(Rng& rng) const;
};

enum class SourceKind {
  uniform_ball,
  uniform_sphere_surface,
  mixture_tilted,
  adversarial_file,
  adversarial_generator,
};

struct ContextSourceSpec {
  SourceKind kind = SourceKind::uniform_ball;
  int d = 2;
  // mixture_tilted: weight on the uniform-ball component; the rest goes to a
  // small ball of radius alt_radius tucked against alt_direction.
  double c0 = 1.0;
  Vec alt_direction;  // empty => e1
  double alt_radius = 0.5;
  // adversarial_file
  std::string path;
  // adversarial_generator
  std::uint64_t generator_seed = 0;
  int block_length = 256;
};

/// Stateful context stream owned by one trial.
class ContextSource {
 public:
  ContextSource(ContextSourceSpec spec, long horizon);

  const ContextSourceSpec& spec() const { return spec_; }
  /// Next context, or nullopt once a file-backed sequence is exhausted.
  std::optional<Vec> next(Rng& rng);

 private:
  ContextSourceSpec spec_;
  std::vector<Vec> replay_;
  std::size_t cursor_ = 0;
  Rng generator_rng_;
  Vec block_direction_;
  long emitted_ = 0;
};

Vec sample_uniform_ball(int d, Rng& rng);
Vec sample_unit_sphere(int d, Rng& rng);

std::optional<Vec> sample_context(ContextSource& source, Rng& rng);

/// Reads an adversarial context file: one context per line, d comma-separated
/// decimals. Lines past `horizon` are ignored; fewer than `horizon` lines is a
/// ConfigError.
std::vector<Vec> load_adversarial_contexts(const std::string& path, int d, long horizon);

/// Noise-free mean reward of `action` on the unmodified context.
double expected_reward(const RewardModel& model, int action, const Vec& x);

/// Mean reward plus one noise draw (apple tasting action 0 is the constant
/// r0, no draw). Takes the agent's original context only:
/// manipulations never reach the reward.
double realize_reward(const RewardModel& model, int action, const Vec& x_original,
                      const NoiseModel& noise, Rng& rng);

Vec random_unit_vector(int d, Rng& rng);

}  // namespace stratclass

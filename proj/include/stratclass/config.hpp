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
#include <string>
#include <utility>
#include <vector>

#include "stratclass/agent.hpp"
#include "stratclass/environment.hpp"

namespace stratclass {

enum class Algorithm { sa_ols, etc, doubling, exp3_sae };

std::string_view to_string(Algorithm a);
std::string_view to_string(Feedback f);
std::string_view to_string(SourceKind k);

struct ThetaSpec {
  bool random_unit = true;
  Vec theta1;                 // explicit only
  std::optional<Vec> theta0;  // explicit bandit only
};

struct AlgorithmOverrides {
  std::optional<long> exploration_length;  // T0
  std::optional<long> tau_star;
  std::optional<double> epsilon;
  std::optional<double> lambda;
  std::size_t grid_cap = 1'000'000;
};

struct ExperimentConfig {
  std::string name;
  Algorithm algorithm = Algorithm::sa_ols;
  Feedback feedback = Feedback::apple_tasting;
  int d = 2;
  long T = 4096;
  double delta = 0.0;
  double sigma = 0.0;
  double r0 = 0.0;
  NoiseKind noise = NoiseKind::gaussian;
  double gamma_fail = 0.05;
  ContextSourceSpec source;
  AgentBehavior agent;
  ThetaSpec theta;
  int seeds = 1;
  std::uint64_t base_seed = 0;
  std::vector<long> checkpoints;
  AlgorithmOverrides overrides;

  /// `name` when set, else algorithm_feedback_d<d>_T<T>.
  std::string run_id() const;
};

/// Dotted-key overrides ("T", "agent.gamma_th") applied on top of the file.
using ConfigOverrides = std::vector<std::pair<std::string, std::string>>;

/// Loads a YAML config, fills defaults and validates. Unknown keys and
/// violated constraints raise ConfigError naming the field or constraint.
/// Relative source.path values resolve against the config's directory.
ExperimentConfig parse_config(const std::string& path, const ConfigOverrides& overrides = {});
ExperimentConfig parse_config_text(const std::string& text, const ConfigOverrides& overrides = {},
                                   const std::string& base_dir = ".");

/// Re-checks every invariant; parse_config calls it.
void validate_config(const ExperimentConfig& config);

/// Powers of two up to T, plus T itself.
std::vector<long> default_checkpoints(long T);

}  // namespace stratclass

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

#include "stratclass/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "stratclass/algorithms.hpp"
#include "stratclass/errors.hpp"

namespace stratclass {
namespace {

const std::set<std::string> kTopKeys = {
    "name", "algorithm", "feedback", "d",         "T",           "delta",    "sigma", "r0",
    "noise", "gamma_fail", "seeds",  "base_seed", "checkpoints", "source",   "agent", "theta",
    "overrides"};
const std::set<std::string> kSourceKeys = {"kind",           "c0",          "alt_direction", "alt_radius",
                                           "path",           "generator_seed", "block_length"};
const std::set<std::string> kAgentKeys = {"mode", "gamma_th", "alpha_rule", "fixed_alpha", "clip_to_ball"};
const std::set<std::string> kThetaKeys = {"kind", "theta1", "theta0"};
const std::set<std::string> kOverrideKeys = {"T0", "tau_star", "epsilon", "lambda", "grid_cap"};

void reject_unknown(const YAML::Node& node, const std::set<std::string>& allowed, const std::string& where) {
  if (!node) return;
  if (!node.IsMap()) throw ConfigError(fmt::format("'{}' must be a mapping", where.empty() ? "config" : where));
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key))
      throw ConfigError(fmt::format("unknown field '{}{}'", where.empty() ? "" : where + ".", key));
  }
}

template <typename T>
T read(const YAML::Node& node, const std::string& field, T fallback) {
  if (!node) return fallback;
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(fmt::format("field '{}' has an invalid value", field));
  }
}

Vec read_vector(const YAML::Node& node, const std::string& field) {
  if (!node.IsSequence()) throw ConfigError(fmt::format("field '{}' must be a list of numbers", field));
  Vec v(static_cast<Eigen::Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) v(static_cast<Eigen::Index>(i)) = read<double>(node[i], field, 0.0);
  return v;
}

Algorithm parse_algorithm(const std::string& s) {
  if (s == "sa_ols") return Algorithm::sa_ols;
  if (s == "etc") return Algorithm::etc;
  if (s == "doubling") return Algorithm::doubling;
  if (s == "exp3_sae") return Algorithm::exp3_sae;
  throw ConfigError(fmt::format("algorithm must be one of sa_ols, etc, doubling, exp3_sae (got '{}')", s));
}

Feedback parse_feedback(const std::string& s) {
  if (s == "apple" || s == "apple_tasting") return Feedback::apple_tasting;
  if (s == "bandit") return Feedback::bandit;
  throw ConfigError(fmt::format("feedback must be apple or bandit (got '{}')", s));
}

SourceKind parse_source(const std::string& s) {
  if (s == "uniform_ball") return SourceKind::uniform_ball;
  if (s == "uniform_sphere_surface") return SourceKind::uniform_sphere_surface;
  if (s == "mixture_tilted") return SourceKind::mixture_tilted;
  if (s == "adversarial_file") return SourceKind::adversarial_file;
  if (s == "adversarial_generator") return SourceKind::adversarial_generator;
  throw ConfigError(fmt::format("unknown source.kind '{}'", s));
}

void apply_override(YAML::Node root, const std::string& dotted, const std::string& value) {
  std::vector<std::string> parts;
  std::stringstream ss(dotted);
  for (std::string p; std::getline(ss, p, '.');) parts.push_back(p);
  if (parts.empty() || parts.size() > 2) throw ConfigError(fmt::format("bad override key '{}'", dotted));
  YAML::Node parsed;
  try {
    parsed = YAML::Load(value);
  } catch (const YAML::Exception&) {
    throw ConfigError(fmt::format("cannot parse override value '{}'", value));
  }
  if (parts.size() == 1) {
    root[parts[0]] = parsed;
  } else {
    YAML::Node section = root[parts[0]];
    section[parts[1]] = parsed;
  }
}

ExperimentConfig from_yaml(const YAML::Node& root, const std::string& base_dir) {
  reject_unknown(root, kTopKeys, "");
  ExperimentConfig c;
  if (!root["algorithm"]) throw ConfigError("missing required field 'algorithm'");
  c.name = read<std::string>(root["name"], "name", "");
  c.algorithm = parse_algorithm(read<std::string>(root["algorithm"], "algorithm", ""));
  c.feedback = parse_feedback(read<std::string>(root["feedback"], "feedback", "apple"));
  c.d = read<int>(root["d"], "d", 2);
  c.T = read<long>(root["T"], "T", 4096);
  c.delta = read<double>(root["delta"], "delta", 0.0);
  c.sigma = read<double>(root["sigma"], "sigma", 0.0);
  c.r0 = read<double>(root["r0"], "r0", 0.0);
  const auto noise = read<std::string>(root["noise"], "noise", "gaussian");
  if (noise == "gaussian") c.noise = NoiseKind::gaussian;
  else if (noise == "bounded_uniform") c.noise = NoiseKind::bounded_uniform;
  else throw ConfigError(fmt::format("noise must be gaussian or bounded_uniform (got '{}')", noise));
  c.gamma_fail = read<double>(root["gamma_fail"], "gamma_fail", 0.05);
  c.seeds = read<int>(root["seeds"], "seeds", 1);
  c.base_seed = read<std::uint64_t>(root["base_seed"], "base_seed", 0);
  if (root["checkpoints"]) {
    if (!root["checkpoints"].IsSequence()) throw ConfigError("field 'checkpoints' must be a list");
    for (const auto& n : root["checkpoints"]) c.checkpoints.push_back(read<long>(n, "checkpoints", 0));
  }

  const YAML::Node src = root["source"];
  reject_unknown(src, kSourceKeys, "source");
  c.source.d = c.d;
  if (src) {
    c.source.kind = parse_source(read<std::string>(src["kind"], "source.kind", "uniform_ball"));
    c.source.c0 = read<double>(src["c0"], "source.c0", 1.0);
    if (src["alt_direction"]) c.source.alt_direction = read_vector(src["alt_direction"], "source.alt_direction");
    c.source.alt_radius = read<double>(src["alt_radius"], "source.alt_radius", 0.5);
    c.source.path = read<std::string>(src["path"], "source.path", "");
    if (!c.source.path.empty() && std::filesystem::path(c.source.path).is_relative())
      c.source.path = (std::filesystem::path(base_dir) / c.source.path).string();
    c.source.generator_seed = read<std::uint64_t>(src["generator_seed"], "source.generator_seed", 0);
    c.source.block_length = read<int>(src["block_length"], "source.block_length", 256);
  }

  const YAML::Node agent = root["agent"];
  reject_unknown(agent, kAgentKeys, "agent");
  c.agent.delta = c.delta;
  if (agent) {
    const auto mode = read<std::string>(agent["mode"], "agent.mode", "lazy");
    if (mode == "lazy") c.agent.mode = TiebreakMode::lazy;
    else if (mode == "trembling") c.agent.mode = TiebreakMode::trembling;
    else throw ConfigError(fmt::format("agent.mode must be lazy or trembling (got '{}')", mode));
    c.agent.gamma_th = read<double>(agent["gamma_th"], "agent.gamma_th", 0.0);
    const auto rule = read<std::string>(agent["alpha_rule"], "agent.alpha_rule", "uniform_random");
    if (rule == "fixed") c.agent.alpha_rule = AlphaRule::fixed;
    else if (rule == "uniform_random") c.agent.alpha_rule = AlphaRule::uniform_random;
    else if (rule == "adversarial_max") c.agent.alpha_rule = AlphaRule::adversarial_max;
    else throw ConfigError(fmt::format("agent.alpha_rule must be fixed, uniform_random or adversarial_max (got '{}')", rule));
    c.agent.fixed_alpha = read<double>(agent["fixed_alpha"], "agent.fixed_alpha", c.agent.gamma_th / 2.0);
    c.agent.clip_to_ball = read<bool>(agent["clip_to_ball"], "agent.clip_to_ball", false);
  }

  const YAML::Node theta = root["theta"];
  reject_unknown(theta, kThetaKeys, "theta");
  if (theta) {
    const auto kind = read<std::string>(theta["kind"], "theta.kind", "random_unit");
    if (kind == "random_unit") {
      c.theta.random_unit = true;
    } else if (kind == "explicit") {
      c.theta.random_unit = false;
      if (!theta["theta1"]) throw ConfigError("theta.kind explicit requires theta.theta1");
      c.theta.theta1 = read_vector(theta["theta1"], "theta.theta1");
      if (theta["theta0"]) c.theta.theta0 = read_vector(theta["theta0"], "theta.theta0");
    } else {
      throw ConfigError(fmt::format("theta.kind must be random_unit or explicit (got '{}')", kind));
    }
  }

  const YAML::Node ov = root["overrides"];
  reject_unknown(ov, kOverrideKeys, "overrides");
  if (ov) {
    if (ov["T0"]) c.overrides.exploration_length = read<long>(ov["T0"], "overrides.T0", 0);
    if (ov["tau_star"]) c.overrides.tau_star = read<long>(ov["tau_star"], "overrides.tau_star", 0);
    if (ov["epsilon"]) c.overrides.epsilon = read<double>(ov["epsilon"], "overrides.epsilon", 0.0);
    if (ov["lambda"]) c.overrides.lambda = read<double>(ov["lambda"], "overrides.lambda", 0.0);
    c.overrides.grid_cap = read<std::size_t>(ov["grid_cap"], "overrides.grid_cap", 1'000'000);
  }

  if (c.checkpoints.empty()) c.checkpoints = default_checkpoints(c.T);
  return c;
}

}  // namespace

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::sa_ols: return "sa_ols";
    case Algorithm::etc: return "etc";
    case Algorithm::doubling: return "doubling";
    case Algorithm::exp3_sae: return "exp3_sae";
  }
  return "?";
}

std::string_view to_string(Feedback f) { return f == Feedback::bandit ? "bandit" : "apple"; }

std::string_view to_string(SourceKind k) {
  switch (k) {
    case SourceKind::uniform_ball: return "uniform_ball";
    case SourceKind::uniform_sphere_surface: return "uniform_sphere_surface";
    case SourceKind::mixture_tilted: return "mixture_tilted";
    case SourceKind::adversarial_file: return "adversarial_file";
    case SourceKind::adversarial_generator: return "adversarial_generator";
  }
  return "?";
}

std::string ExperimentConfig::run_id() const {
  if (!name.empty()) return name;
  return fmt::format("{}_{}_d{}_T{}", to_string(algorithm), to_string(feedback), d, T);
}

std::vector<long> default_checkpoints(long T) {
  std::vector<long> out;
  for (long t = 1; t <= T; t *= 2) out.push_back(t);
  if (out.empty() || out.back() != T) out.push_back(T);
  return out;
}

void validate_config(const ExperimentConfig& c) {
  if (c.d < 1) throw ConfigError("d must be >= 1");
  if (!(c.delta >= 0.0 && c.delta < 1.0)) throw ConfigError("delta must lie in [0,1)");
  if (!(c.sigma >= 0.0)) throw ConfigError("sigma must be >= 0");
  if (c.T < 2L * c.d) throw ConfigError(fmt::format("T must be >= 2d (T = {}, d = {})", c.T, c.d));
  if (c.seeds < 1) throw ConfigError("seeds must be >= 1");
  if (!(c.gamma_fail > 0.0 && c.gamma_fail < 1.0)) throw ConfigError("gamma_fail must lie in (0,1)");
  if (!(c.agent.gamma_th >= 0.0)) throw ConfigError("agent.gamma_th must be >= 0");
  if (!(c.agent.fixed_alpha >= 0.0)) throw ConfigError("agent.fixed_alpha must be >= 0");
  if (c.source.kind == SourceKind::mixture_tilted && !(c.source.c0 > 0.0 && c.source.c0 <= 1.0))
    throw ConfigError("source.c0 must lie in (0,1]");
  if (!(c.source.alt_radius > 0.0 && c.source.alt_radius <= 1.0))
    throw ConfigError("source.alt_radius must lie in (0,1]");
  if (c.source.alt_direction.size() != 0 && c.source.alt_direction.size() != c.d)
    throw ConfigError("source.alt_direction must have d entries");
  if (c.source.kind == SourceKind::adversarial_file && c.source.path.empty())
    throw ConfigError("source.kind adversarial_file requires source.path");
  if (c.source.block_length < 1) throw ConfigError("source.block_length must be >= 1");
  for (long t : c.checkpoints)
    if (t < 1 || t > c.T) throw ConfigError(fmt::format("checkpoint {} outside [1, T]", t));
  if (!std::is_sorted(c.checkpoints.begin(), c.checkpoints.end()))
    throw ConfigError("checkpoints must be increasing");

  if (!c.theta.random_unit) {
    if (c.theta.theta1.size() != c.d) throw ConfigError("theta.theta1 must have d entries");
    if (c.theta.theta1.norm() > 1.0 + 1e-12) throw ConfigError("||theta.theta1|| must be <= 1");
    if (c.feedback == Feedback::bandit) {
      if (!c.theta.theta0) throw ConfigError("bandit feedback with explicit theta requires theta.theta0");
      if (c.theta.theta0->size() != c.d) throw ConfigError("theta.theta0 must have d entries");
      if (c.theta.theta0->norm() > 1.0 + 1e-12) throw ConfigError("||theta.theta0|| must be <= 1");
    } else if (c.theta.theta0) {
      throw ConfigError("theta.theta0 is only meaningful with bandit feedback");
    }
  }

  if (c.overrides.exploration_length && *c.overrides.exploration_length < 1)
    throw ConfigError("overrides.T0 must be >= 1");
  if (c.overrides.tau_star && *c.overrides.tau_star < 1) throw ConfigError("overrides.tau_star must be >= 1");

  if (c.algorithm == Algorithm::exp3_sae) {
    const double eps = c.overrides.epsilon.value_or(exp3_default_epsilon(c.d, c.T, c.sigma));
    if (!(eps > 0.0 && eps <= 1.0))
      throw ConfigError("exp3_sae: epsilon must lie in (0,1]; with sigma = 0 set overrides.epsilon");
    const std::size_t size = policy_grid_size(c.d, eps);
    if (size > c.overrides.grid_cap) {
      const std::string shown =
          size == std::numeric_limits<std::size_t>::max() ? std::string(">= 1e18") : std::to_string(size);
      throw ConfigError(fmt::format("exp3_sae: policy grid has |E| = {} points (d = {}, epsilon = {:.6g}), "
                                    "exceeding the cap of {}",
                                    shown, c.d, eps, c.overrides.grid_cap));
    }
    exp3_parameters(c.T, c.sigma, size, eps, c.overrides.lambda);
  }
}

ExperimentConfig parse_config_text(const std::string& text, const ConfigOverrides& overrides,
                                   const std::string& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(fmt::format("cannot parse config: {}", e.what()));
  }
  if (!root.IsMap()) throw ConfigError("config must be a mapping of fields");
  for (const auto& [key, value] : overrides) apply_override(root, key, value);
  ExperimentConfig c = from_yaml(root, base_dir);
  validate_config(c);
  return c;
}

ExperimentConfig parse_config(const std::string& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_config_text(buffer.str(), overrides, dir.empty() ? "." : dir.string());
}

}  // namespace stratclass

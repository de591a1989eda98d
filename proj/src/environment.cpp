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

#include "stratclass/environment.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "stratclass/errors.hpp"

namespace stratclass {
namespace {

constexpr double kNormSlack = 1e-12;

Vec gaussian_vector(int d, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec g(d);
  for (int i = 0; i < d; ++i) g(i) = normal(rng);
  return g;
}

Vec unit_e1(int d) {
  Vec e = Vec::Zero(d);
  e(0) = 1.0;
  return e;
}

}  // namespace

Rng derive_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x5eedu};
  return Rng(seq);
}

void RewardModel::validate() const {
  if (theta1.size() == 0) throw std::invalid_argument("theta1 is empty");
  if (!theta1.allFinite()) throw std::invalid_argument("theta1 has non-finite entries");
  if (theta1.norm() > 1.0 + kNormSlack) throw std::invalid_argument("||theta1|| must be <= 1");
  if (sigma < 0.0) throw std::invalid_argument("sigma must be >= 0");
  if (feedback == Feedback::bandit) {
    if (!theta0) throw std::invalid_argument("bandit feedback requires theta0");
    if (theta0->size() != theta1.size()) throw std::invalid_argument("theta0 dimension mismatch");
    if (theta0->norm() > 1.0 + kNormSlack) throw std::invalid_argument("||theta0|| must be <= 1");
  } else if (theta0) {
    throw std::invalid_argument("apple-tasting feedback takes r0, not theta0");
  }
}

double NoiseModel::draw(Rng& rng) const {
  if (sigma == 0.0) return 0.0;
  switch (kind) {
    case NoiseKind::gaussian:
      return std::normal_distribution<double>(0.0, sigma)(rng);
    case NoiseKind::bounded_uniform: {
      const double half = sigma * std::sqrt(3.0);
      return std::uniform_real_distribution<double>(-half, half)(rng);
    }
  }
  return 0.0;
}

Vec random_unit_vector(int d, Rng& rng) {
  Vec g = gaussian_vector(d, rng);
  double n = g.norm();
  while (n == 0.0) {
    g = gaussian_vector(d, rng);
    n = g.norm();
  }
  return g / n;
}

Vec sample_unit_sphere(int d, Rng& rng) { return random_unit_vector(d, rng); }

Vec sample_uniform_ball(int d, Rng& rng) {
  Vec dir = random_unit_vector(d, rng);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  return dir * std::pow(u, 1.0 / d);
}

std::vector<Vec> load_adversarial_contexts(const std::string& path, int d, long horizon) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open adversarial context file '{}'", path));
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(horizon));
  std::string line;
  long line_no = 0;
  while (static_cast<long>(out.size()) < horizon && std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    Vec x(d);
    std::stringstream ss(line);
    std::string cell;
    int k = 0;
    while (std::getline(ss, cell, ',')) {
      if (k >= d)
        throw ConfigError(fmt::format("{}:{}: more than {} values", path, line_no, d));
      try {
        std::size_t used = 0;
        x(k) = std::stod(cell, &used);
        if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ConfigError(fmt::format("{}:{}: cannot parse '{}'", path, line_no, cell));
      }
      ++k;
    }
    if (k != d) throw ConfigError(fmt::format("{}:{}: expected {} values, got {}", path, line_no, d, k));
    if (!x.allFinite() || x.norm() > 1.0 + kNormSlack)
      throw ConfigError(fmt::format("{}:{}: context must be finite with norm <= 1", path, line_no));
    out.push_back(std::move(x));
  }
  if (static_cast<long>(out.size()) < horizon)
    throw ConfigError(fmt::format("adversarial context file '{}' has {} lines, need T = {}", path,
                                  out.size(), horizon));
  return out;
}

ContextSource::ContextSource(ContextSourceSpec spec, long horizon)
    : spec_(std::move(spec)), generator_rng_(derive_rng(spec_.generator_seed, 0xad5)) {
  if (spec_.d < 1) throw ConfigError("context dimension must be >= 1");
  if (spec_.alt_direction.size() == 0) spec_.alt_direction = unit_e1(spec_.d);
  if (spec_.alt_direction.size() != spec_.d) throw ConfigError("alt_direction dimension mismatch");
  const double n = spec_.alt_direction.norm();
  if (n == 0.0) throw ConfigError("alt_direction must be nonzero");
  spec_.alt_direction /= n;
  if (spec_.kind == SourceKind::mixture_tilted && !(spec_.c0 > 0.0 && spec_.c0 <= 1.0))
    throw ConfigError("c0 must lie in (0,1]");
  if (!(spec_.alt_radius > 0.0 && spec_.alt_radius <= 1.0))
    throw ConfigError("alt_radius must lie in (0,1]");
  if (spec_.kind == SourceKind::adversarial_file)
    replay_ = load_adversarial_contexts(spec_.path, spec_.d, horizon);
  if (spec_.kind == SourceKind::adversarial_generator && spec_.block_length < 1)
    throw ConfigError("block_length must be >= 1");
}

std::optional<Vec> ContextSource::next(Rng& rng) {
  switch (spec_.kind) {
    case SourceKind::uniform_ball:
      return sample_uniform_ball(spec_.d, rng);
    case SourceKind::uniform_sphere_surface:
      return sample_unit_sphere(spec_.d, rng);
    case SourceKind::mixture_tilted: {
      const double coin = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      if (coin < spec_.c0) return sample_uniform_ball(spec_.d, rng);
      Vec local = sample_uniform_ball(spec_.d, rng) * spec_.alt_radius;
      return Vec(local + (1.0 - spec_.alt_radius) * spec_.alt_direction);
    }
    case SourceKind::adversarial_file:
      if (cursor_ >= replay_.size()) return std::nullopt;
      return replay_[cursor_++];
    case SourceKind::adversarial_generator: {
      // Oblivious: driven only by generator_seed, never by the trial stream.
      if (emitted_ % spec_.block_length == 0)
        block_direction_ = random_unit_vector(spec_.d, generator_rng_);
      ++emitted_;
      Vec jitter = sample_uniform_ball(spec_.d, generator_rng_) * 0.35;
      const double radius = std::uniform_real_distribution<double>(-1.0, 1.0)(generator_rng_);
      Vec x = radius * block_direction_ + jitter;
      const double n = x.norm();
      if (n > 1.0) x /= n;
      return x;
    }
  }
  return std::nullopt;
}

std::optional<Vec> sample_context(ContextSource& source, Rng& rng) { return source.next(rng); }

double expected_reward(const RewardModel& model, int action, const Vec& x) {
  if (action == 1) return model.theta1.dot(x);
  if (model.feedback == Feedback::bandit) return model.theta0->dot(x);
  return model.r0;
}

double realize_reward(const RewardModel& model, int action, const Vec& x_original,
                      const NoiseModel& noise, Rng& rng) {
  if (action == 0 && model.feedback == Feedback::apple_tasting) return model.r0;
  return expected_reward(model, action, x_original) + noise.draw(rng);
}

}  // namespace stratclass

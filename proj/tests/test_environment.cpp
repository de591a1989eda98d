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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "generators.hpp"
#include "stratclass/environment.hpp"
#include "stratclass/errors.hpp"

using namespace stratclass;
using namespace stratclass::testing;

namespace {

// Marginal CDF of one coordinate under the uniform unit disk.
double disk_marginal_cdf(double u) {
  u = std::clamp(u, -1.0, 1.0);
  return 0.5 + (u * std::sqrt(1 - u * u) + std::asin(u)) / std::numbers::pi;
}

// Asymptotic Kolmogorov tail.
double ks_p_value(double d_stat, std::size_t n) {
  const double lambda = std::sqrt(static_cast<double>(n)) * d_stat;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) p += 2 * ((k % 2) ? 1 : -1) * std::exp(-2.0 * k * k * lambda * lambda);
  return std::clamp(p, 0.0, 1.0);
}

std::filesystem::path write_temp(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << body;
  return path;
}

RewardModel apple_model(Vec theta1, double r0 = 0.0, double sigma = 0.0) {
  RewardModel m;
  m.theta1 = std::move(theta1);
  m.r0 = r0;
  m.sigma = sigma;
  return m;
}

}  // namespace

TEST_CASE("RewardModel pairs theta0 with bandit mode only") {
  RewardModel m = apple_model(Vec::Unit(2, 0));
  CHECK_NOTHROW(m.validate());
  m.theta0 = Vec::Unit(2, 1);
  CHECK_THROWS(m.validate());
  m.feedback = Feedback::bandit;
  CHECK_NOTHROW(m.validate());
  m.theta0.reset();
  CHECK_THROWS(m.validate());
  m.theta0 = Vec::Constant(2, 1.0);
  CHECK_THROWS(m.validate());  // norm sqrt(2)
}

TEST_CASE("expected_reward examples") {
  Vec x(2);
  x << 0.7, 0.1;
  const auto m = apple_model(Vec::Unit(2, 0), 0.25);
  CHECK(expected_reward(m, 0, x) == 0.25);
  CHECK(expected_reward(m, 1, x) == doctest::Approx(0.7));

  RewardModel b;
  b.feedback = Feedback::bandit;
  b.theta1 = Vec::Unit(2, 0);
  b.theta0 = Eigen::Vector2d(0.0, -1.0);
  CHECK(expected_reward(b, 0, Eigen::Vector2d(0.2, 0.5)) == doctest::Approx(-0.5));
}

TEST_CASE("realize_reward is exact without noise and reproducible with it") {
  const Vec x = Eigen::Vector2d(0.3, -0.4);
  auto m = apple_model(Eigen::Vector2d(0.6, 0.8), 0.1);
  Rng rng = derive_rng(1, 1);
  CHECK(realize_reward(m, 1, x, NoiseModel{0.0}, rng) == expected_reward(m, 1, x));
  CHECK(realize_reward(m, 0, x, NoiseModel{0.0}, rng) == 0.1);

  Rng a = derive_rng(5, 4), b = derive_rng(5, 4);
  const NoiseModel noise{0.1};
  CHECK(realize_reward(m, 1, x, noise, a) == realize_reward(m, 1, x, noise, b));
}

TEST_CASE("realize_reward sample mean sits within 3 sigma/sqrt(n) of the mean") {
  const Vec x = Eigen::Vector2d(0.3, 0.5);
  const auto m = apple_model(Eigen::Vector2d(0.6, 0.8), 0.0, 0.1);
  for (auto kind : {NoiseKind::gaussian, NoiseKind::bounded_uniform}) {
    Rng rng = derive_rng(7, static_cast<std::uint64_t>(kind));
    const NoiseModel noise{0.1, kind};
    const int n = 100000;
    double sum = 0, sq = 0;
    for (int i = 0; i < n; ++i) {
      const double r = realize_reward(m, 1, x, noise, rng);
      sum += r;
      sq += r * r;
    }
    const double mean = sum / n;
    CHECK(std::abs(mean - expected_reward(m, 1, x)) <= 3 * 0.1 / std::sqrt(n));
    const double var = sq / n - mean * mean;
    CHECK(var == doctest::Approx(0.01).epsilon(0.03));
  }
}

TEST_CASE("bounded_uniform noise stays inside sigma*sqrt(3)") {
  Rng rng = derive_rng(8, 0);
  const NoiseModel noise{0.2, NoiseKind::bounded_uniform};
  double worst = 0;
  for (int i = 0; i < 20000; ++i) worst = std::max(worst, std::abs(noise.draw(rng)));
  CHECK(worst <= 0.2 * std::sqrt(3.0));
}

TEST_CASE("sphere samples have unit norm and ball samples stay inside") {
  int violations = 0;
  for (int c = 0; c < 2000; ++c) {
    Rng rng = case_rng(201, c);
    const int d = uniform_int(rng, 1, 12);
    if (std::abs(sample_unit_sphere(d, rng).norm() - 1.0) > 1e-12) ++violations;
    if (sample_uniform_ball(d, rng).norm() > 1.0 + 1e-12) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("uniform ball: symmetric half-space and disk second moment") {
  Rng rng = derive_rng(9, 0);
  const int n = 1'000'000;
  long positive = 0;
  for (int i = 0; i < n; ++i) positive += sample_uniform_ball(3, rng)(0) >= 0.0;
  const double p = static_cast<double>(positive) / n;
  CHECK(std::abs(p - 0.5) <= 3 * std::sqrt(0.25 / n));

  // Quadrature oracle for E[x1^2] on the disk: int_{-1}^{1} u^2 * 2 sqrt(1-u^2) du / pi.
  double quad = 0.0;
  const int m = 200000;
  for (int k = 0; k < m; ++k) {
    const double u = -1.0 + (k + 0.5) * 2.0 / m;
    quad += u * u * 2.0 * std::sqrt(1 - u * u) / std::numbers::pi * (2.0 / m);
  }
  CHECK(quad == doctest::Approx(0.25).epsilon(1e-6));

  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    const double v = std::pow(sample_uniform_ball(2, rng)(0), 2);
    sum += v;
    sq += v * v;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  CHECK(std::abs(mean - quad) <= 3 * se);
}

TEST_CASE("mixture with c0 = 1 matches the uniform disk marginal (KS)") {
  ContextSourceSpec spec;
  spec.kind = SourceKind::mixture_tilted;
  spec.d = 2;
  spec.c0 = 1.0;
  ContextSource source(spec, 100000);
  Rng rng = derive_rng(10, 0);
  std::vector<double> xs;
  for (int i = 0; i < 100000; ++i) xs.push_back((*source.next(rng))(0));
  std::sort(xs.begin(), xs.end());
  double stat = 0;
  const double n = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = disk_marginal_cdf(xs[i]);
    stat = std::max({stat, std::abs(f - i / n), std::abs(f - (i + 1) / n)});
  }
  CHECK(ks_p_value(stat, xs.size()) > 0.01);
}

TEST_CASE("tilted mixture stays in the ball and leans toward its direction") {
  ContextSourceSpec spec;
  spec.kind = SourceKind::mixture_tilted;
  spec.d = 3;
  spec.c0 = 0.4;
  spec.alt_direction = Vec::Unit(3, 1);
  ContextSource source(spec, 50000);
  Rng rng = derive_rng(10, 1);
  double mean = 0;
  int violations = 0;
  for (int i = 0; i < 50000; ++i) {
    const Vec x = *source.next(rng);
    if (x.norm() > 1 + 1e-12) ++violations;
    mean += x(1) / 50000;
  }
  CHECK(violations == 0);
  CHECK(mean > 0.2);
}

TEST_CASE("adversarial file replays bit-identically and validates eagerly") {
  const auto good = write_temp("stratclass_ctx_good.csv", "0.1,0.2\n-0.5,0.5\n0.9,0.0\n");
  ContextSourceSpec spec;
  spec.kind = SourceKind::adversarial_file;
  spec.d = 2;
  spec.path = good.string();
  ContextSource a(spec, 3), b(spec, 3);
  Rng ra = derive_rng(1, 1), rb = derive_rng(2, 2);
  for (int i = 0; i < 3; ++i) CHECK(*a.next(ra) == *b.next(rb));
  CHECK_FALSE(a.next(ra).has_value());

  CHECK_THROWS_AS(ContextSource(spec, 4), ConfigError);  // too short for T
  spec.path = write_temp("stratclass_ctx_norm.csv", "0.9,0.9\n").string();
  CHECK_THROWS_AS(ContextSource(spec, 1), ConfigError);
  spec.path = write_temp("stratclass_ctx_text.csv", "0.1,abc\n").string();
  CHECK_THROWS_AS(ContextSource(spec, 1), ConfigError);
  spec.path = "/nonexistent/stratclass.csv";
  CHECK_THROWS_AS(ContextSource(spec, 1), ConfigError);
}

TEST_CASE("adversarial generator is a pure function of its seed") {
  ContextSourceSpec spec;
  spec.kind = SourceKind::adversarial_generator;
  spec.d = 4;
  spec.generator_seed = 99;
  spec.block_length = 16;
  ContextSource a(spec, 500), b(spec, 500);
  Rng ra = derive_rng(1, 1), rb = derive_rng(3, 3);
  int mismatches = 0, outside = 0;
  for (int i = 0; i < 500; ++i) {
    const Vec x = *a.next(ra);
    if (x != *b.next(rb)) ++mismatches;
    if (x.norm() > 1 + 1e-12) ++outside;
  }
  CHECK(mismatches == 0);
  CHECK(outside == 0);
}

TEST_CASE("derived streams are distinct and reproducible") {
  Rng a = derive_rng(42, 1), b = derive_rng(42, 2), c = derive_rng(42, 1);
  const auto va = a(), vb = b(), vc = c();
  CHECK(va != vb);
  CHECK(va == vc);
}

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

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "stratclass/evaluation.hpp"
#include "stratclass/simulation.hpp"

namespace stratclass {

struct SummaryRow {
  std::string run_id;
  long T = 0;
  int seeds = 0;
  double mean_regret = 0.0;
  double std_regret = 0.0;  // sample std across seeds; 0 with one seed
  bool single_seed = false;
};

/// One row per run (final cumulative regret). Runs must share algorithm,
/// feedback and d, and no horizon may repeat; otherwise ConfigError.
std::vector<SummaryRow> summarize(std::span<const RunArtifacts> runs);

/// Slope of log(mean regret) against log T over the summary rows.
ScalingFit summary_slope(std::span<const SummaryRow> rows);

void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows);

/// Log-log plot of mean regret with +-1 std bars and the fitted line.
void write_svg_plot(std::ostream& out, std::span<const SummaryRow> rows, const std::string& title);

/// "4096,8192,...,131072" -> geometric continuation from the first two
/// values up to the last. Plain lists pass through.
std::vector<std::string> expand_sweep_values(const std::string& list);

}  // namespace stratclass

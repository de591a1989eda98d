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

#include "stratclass/summary.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "stratclass/errors.hpp"

namespace stratclass {

std::vector<SummaryRow> summarize(std::span<const RunArtifacts> runs) {
  std::vector<SummaryRow> rows;
  if (runs.empty()) return rows;
  const auto& first = runs.front().config;
  std::set<long> horizons;
  for (const auto& run : runs) {
    const auto& c = run.config;
    if (c.algorithm != first.algorithm || c.feedback != first.feedback || c.d != first.d)
      throw ConfigError(fmt::format("mismatched sweep dimensions: {} vs {}", c.run_id(), first.run_id()));
    if (!horizons.insert(c.T).second) throw ConfigError(fmt::format("mismatched sweep dimensions: T = {} repeats", c.T));

    SummaryRow row;
    row.run_id = c.run_id();
    row.T = c.T;
    row.seeds = static_cast<int>(run.trials.size());
    row.single_seed = row.seeds == 1;
    double sum = 0.0;
    for (const auto& trial : run.trials) sum += trial.cum_regret;
    row.mean_regret = row.seeds > 0 ? sum / row.seeds : 0.0;
    if (row.seeds > 1) {
      double ss = 0.0;
      for (const auto& trial : run.trials) ss += (trial.cum_regret - row.mean_regret) * (trial.cum_regret - row.mean_regret);
      row.std_regret = std::sqrt(ss / (row.seeds - 1));
    }
    rows.push_back(row);
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.T < b.T; });
  return rows;
}

ScalingFit summary_slope(std::span<const SummaryRow> rows) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows) pts.emplace_back(static_cast<double>(r.T), r.mean_regret);
  return fit_scaling_exponent(pts);
}

void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows) {
  out << "run_id,T,seeds,mean_regret,std_regret,single_seed\n";
  for (const auto& r : rows)
    out << fmt::format("{},{},{},{:.12g},{:.12g},{}\n", r.run_id, r.T, r.seeds, r.mean_regret, r.std_regret,
                       r.single_seed ? 1 : 0);
}

void write_svg_plot(std::ostream& out, std::span<const SummaryRow> rows, const std::string& title) {
  constexpr double W = 640, H = 420, L = 70, R = 20, Tm = 40, B = 50;
  std::vector<const SummaryRow*> pts;
  for (const auto& r : rows)
    if (r.T > 0 && r.mean_regret > 0) pts.push_back(&r);

  out << fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
                     "font-family=\"sans-serif\" font-size=\"11\">\n",
                     W, H);
  out << fmt::format("<text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n", W / 2, title);
  if (pts.empty()) {
    out << "<text x=\"320\" y=\"210\" text-anchor=\"middle\">no positive points</text>\n</svg>\n";
    return;
  }

  double xlo = std::log2(static_cast<double>(pts.front()->T)), xhi = xlo;
  double ylo = std::log2(pts.front()->mean_regret), yhi = ylo;
  for (const auto* p : pts) {
    const double lx = std::log2(static_cast<double>(p->T));
    xlo = std::min(xlo, lx);
    xhi = std::max(xhi, lx);
    const double lo = std::max(p->mean_regret - p->std_regret, p->mean_regret * 0.5);
    ylo = std::min(ylo, std::log2(lo));
    yhi = std::max(yhi, std::log2(p->mean_regret + p->std_regret));
  }
  xlo = std::floor(xlo) - 0.5;
  xhi = std::ceil(xhi) + 0.5;
  ylo = std::floor(ylo);
  yhi = std::ceil(yhi);
  if (yhi - ylo < 1) yhi = ylo + 1;
  auto px = [&](double lx) { return L + (lx - xlo) / (xhi - xlo) * (W - L - R); };
  auto py = [&](double ly) { return H - B - (ly - ylo) / (yhi - ylo) * (H - Tm - B); };

  out << fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>\n", L, Tm,
                     W - L - R, H - Tm - B);
  for (int k = static_cast<int>(std::ceil(xlo)); k <= static_cast<int>(std::floor(xhi)); ++k)
    out << fmt::format("<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\">2^{}</text>\n", px(k), H - B + 16, k);
  for (int k = static_cast<int>(ylo); k <= static_cast<int>(yhi); ++k)
    out << fmt::format("<text x=\"{}\" y=\"{:.1f}\" text-anchor=\"end\">2^{}</text>\n", L - 6, py(k) + 4, k);
  out << fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">T</text>\n", (L + W - R) / 2, H - 12);
  out << fmt::format("<text x=\"14\" y=\"{}\" transform=\"rotate(-90 14 {})\" text-anchor=\"middle\">"
                     "cumulative regret</text>\n",
                     H / 2, H / 2);

  std::string poly;
  for (const auto* p : pts) {
    const double x = px(std::log2(static_cast<double>(p->T)));
    const double y = py(std::log2(p->mean_regret));
    poly += fmt::format("{:.1f},{:.1f} ", x, y);
    if (p->std_regret > 0) {
      const double lo = std::max(p->mean_regret - p->std_regret, p->mean_regret * 0.5);
      out << fmt::format("<line x1=\"{0:.1f}\" x2=\"{0:.1f}\" y1=\"{1:.1f}\" y2=\"{2:.1f}\" stroke=\"#999\"/>\n", x,
                         py(std::log2(lo)), py(std::log2(p->mean_regret + p->std_regret)));
    }
    out << fmt::format("<circle cx=\"{:.1f}\" cy=\"{:.1f}\" r=\"3\" fill=\"#1f5fa8\"/>\n", x, y);
  }
  out << fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"#1f5fa8\"/>\n", poly);

  if (pts.size() >= 4) {
    std::vector<SummaryRow> kept;
    for (const auto* p : pts) kept.push_back(*p);
    const auto fit = summary_slope(kept);
    // Fit lives in natural logs; convert to log2 coordinates.
    auto fit_y = [&](double lx) { return (fit.intercept + fit.slope * lx * std::log(2.0)) / std::log(2.0); };
    const double a = std::log2(static_cast<double>(pts.front()->T));
    const double b = std::log2(static_cast<double>(pts.back()->T));
    out << fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"#c0392b\" "
                       "stroke-dasharray=\"4 3\"/>\n",
                       px(a), py(fit_y(a)), px(b), py(fit_y(b)));
    out << fmt::format("<text x=\"{}\" y=\"{}\">slope {:.3f} +- {:.3f}</text>\n", L + 8, Tm + 16, fit.slope,
                       fit.slope_std_error);
  }
  out << "</svg>\n";
}

std::vector<std::string> expand_sweep_values(const std::string& list) {
  std::vector<std::string> items;
  std::stringstream ss(list);
  for (std::string item; std::getline(ss, item, ',');) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) items.push_back(item);
  }
  const auto dots = std::find(items.begin(), items.end(), "...");
  if (dots == items.end()) return items;
  if (dots - items.begin() != 2 || items.end() - dots != 2)
    throw ConfigError("sweep values with '...' must look like a,b,...,z");
  double a = 0, b = 0, z = 0;
  try {
    a = std::stod(items[0]);
    b = std::stod(items[1]);
    z = std::stod(items[3]);
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("cannot expand sweep values '{}'", list));
  }
  if (!(a > 0 && b > a && z >= b)) throw ConfigError(fmt::format("cannot expand sweep values '{}'", list));
  const double ratio = b / a;
  std::vector<std::string> out;
  for (double v = a; v <= z * (1 + 1e-12); v *= ratio) out.push_back(fmt::format("{:.15g}", std::round(v * 1e9) / 1e9));
  return out;
}

}  // namespace stratclass

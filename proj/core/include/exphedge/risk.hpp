#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace exphedge {

// Distribution summary of a terminal P&L sample. VaR entries are P&L levels
// (not losses): the lower order statistic at rank ceil((1-c) n), without
// interpolation. CVaR at c is the mean of every sample value <= that level.
struct RiskReport {
  std::int64_t n = 0;
  double mean = 0.0;
  double std = 0.0;  // sample, n-1 denominator
  std::vector<std::pair<double, double>> utilities;  // (gamma, E[-exp(-gamma X)])
  std::vector<double> levels;  // confidence levels, descending
  std::vector<double> var;     // aligned with levels
  std::vector<double> cvar;    // aligned with levels

  double var_at(double level) const;
  double cvar_at(double level) const;
  double utility_at(double gamma) const;
};

RiskReport report(const std::vector<double>& pnl,
                  const std::vector<double>& gammas = {0.25, 1.0, 4.0},
                  const std::vector<double>& levels = {0.90, 0.99});

}  // namespace exphedge

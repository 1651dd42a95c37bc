#include "exphedge/risk.hpp"

#include <algorithm>
#include <cmath>

#include "exphedge/errors.hpp"

namespace exphedge {

namespace {

double lookup(const std::vector<double>& levels, const std::vector<double>& values,
              double level, const char* what) {
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] == level) return values[i];
  }
  throw InvalidParams(std::string(what) + ": level not present in report");
}

}  // namespace

double RiskReport::var_at(double level) const {
  return lookup(levels, var, level, "var_at");
}

double RiskReport::cvar_at(double level) const {
  return lookup(levels, cvar, level, "cvar_at");
}

double RiskReport::utility_at(double gamma) const {
  for (const auto& [g, u] : utilities) {
    if (g == gamma) return u;
  }
  throw InvalidParams("utility_at: gamma not present in report");
}

RiskReport report(const std::vector<double>& pnl,
                  const std::vector<double>& gammas,
                  const std::vector<double>& levels) {
  const std::int64_t n = static_cast<std::int64_t>(pnl.size());
  if (n < 2) throw EmptySample("risk report: need at least two samples");
  for (double x : pnl) {
    if (!std::isfinite(x)) throw InvalidParams("risk report: non-finite sample");
  }
  for (double g : gammas) {
    if (!(g > 0.0) || !std::isfinite(g)) {
      throw InvalidParams("risk report: gammas must be positive");
    }
  }
  for (double c : levels) {
    if (!(c > 0.0 && c < 1.0)) {
      throw InvalidParams("risk report: levels must lie in (0,1)");
    }
  }

  RiskReport out;
  out.n = n;

  double mean = 0.0;
  for (double x : pnl) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : pnl) ss += (x - mean) * (x - mean);
  out.mean = mean;
  out.std = std::sqrt(ss / static_cast<double>(n - 1));

  out.utilities.reserve(gammas.size());
  for (double g : gammas) {
    double u = 0.0;
    for (double x : pnl) u -= std::exp(-g * x);
    out.utilities.emplace_back(g, u / static_cast<double>(n));
  }

  std::vector<double> sorted = pnl;
  std::sort(sorted.begin(), sorted.end());
  out.levels = levels;
  std::sort(out.levels.begin(), out.levels.end(), std::greater<>());
  out.var.reserve(out.levels.size());
  out.cvar.reserve(out.levels.size());
  for (double c : out.levels) {
    const auto rank = static_cast<std::int64_t>(
        std::ceil((1.0 - c) * static_cast<double>(n)));
    const std::int64_t idx = std::max<std::int64_t>(rank, 1) - 1;
    const double q = sorted[static_cast<std::size_t>(idx)];
    // Mean of every value <= q, ties included.
    const auto end = std::upper_bound(sorted.begin(), sorted.end(), q);
    double tail = 0.0;
    for (auto it = sorted.begin(); it != end; ++it) tail += *it;
    out.var.push_back(q);
    out.cvar.push_back(tail / static_cast<double>(end - sorted.begin()));
  }
  return out;
}

}  // namespace exphedge

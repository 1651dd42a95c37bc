// Acceptance gate: one line per criterion, nonzero exit if any fails.
// Tolerances are pinned here and nowhere else.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "exphedge/allocation.hpp"
#include "exphedge/analytic.hpp"
#include "exphedge/basis.hpp"
#include "exphedge/claims.hpp"
#include "exphedge/config.hpp"
#include "exphedge/errors.hpp"
#include "exphedge/experiment.hpp"
#include "exphedge/market.hpp"
#include "exphedge/optimizer.hpp"
#include "exphedge/pricing.hpp"
#include "exphedge/risk.hpp"

using namespace exphedge;

namespace {

int g_failures = 0;

void outcome(const char* id, bool pass, const std::string& detail) {
  std::printf("%s %s %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  if (!pass) ++g_failures;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

MarketParams benchmark_market() {
  return MarketParams::one_asset(0.1, 0.2, 0.0, 1.0, 1.0, 50);
}

// ---- A1: closed-form put value ------------------------------------------

void a1_black_scholes_put() {
  const double price = bs_put(1.0, 1.0, 0.2, 0.0, 1.0).price;
  const bool pass = std::abs(price - 0.0797) <= 2e-4;
  outcome("A1", pass,
          "black_scholes_put price=" + fmt(price) + " target=0.0797 band=2e-4");
}

// ---- A2/A3: closed-form strategy replays --------------------------------

void a2_a3_theoretical_replays() {
  const MarketParams m = benchmark_market();
  const PathSet paths = simulate_gbm(m, {100000, 211, false});

  const TheoreticalStrategy merton(m, 1.0, Claim::zero());
  const RiskReport r0 = report(apply(merton, Claim::zero(), paths));
  const double u2_0 = r0.utility_at(1.0);
  {
    const bool pass = std::abs(r0.mean - 0.25) <= 0.01 &&
                      std::abs(r0.std - 0.50) <= 0.01 &&
                      std::abs(u2_0 - (-0.8825)) <= 0.01;
    outcome("A2", pass,
            "merton_replay mean=" + fmt(r0.mean) + " (0.25±0.01) std=" +
                fmt(r0.std) + " (0.50±0.01) u2=" + fmt(u2_0) +
                " (-0.8825±0.01)");
  }

  const TheoreticalStrategy put_hedge(m, 1.0, Claim::put(1.0));
  const RiskReport r1 = report(apply(put_hedge, Claim::put(1.0), paths));
  const double u2_1 = r1.utility_at(1.0);
  {
    const bool pass = std::abs(r1.mean - 0.3297) <= 0.012 &&
                      std::abs(u2_1 - (-0.8149)) <= 0.012;
    outcome("A3", pass,
            "put_buyer_replay mean=" + fmt(r1.mean) + " (0.3297±0.012) u2=" +
                fmt(u2_1) + " (-0.8149±0.012)");
  }
}

// ---- A4: learned indifference price --------------------------------------

void a4_learned_price() {
  const MarketParams m = benchmark_market();
  const PathSet paths = simulate_gbm(m, {100000, 4242, false});
  const BasisSet basis = BasisSet::poly(2, m.spot0());
  const StrategyTable merton = learn(paths, Claim::zero(), basis, 1.0);
  const StrategyTable claim = learn(paths, Claim::put(1.0), basis, 1.0);
  const double price =
      indifference_price(certainty_equivalent(claim),
                         certainty_equivalent(merton), PriceSide::buyer);
  const bool pass = std::abs(price - 0.0797) <= 0.005;
  outcome("A4", pass,
          "learned_price n=100000 basis=poly:2 price=" + fmt(price) +
              " target=0.0797 band=0.005");
}

// ---- A5: price from reported utilities -----------------------------------

void a5_price_from_utilities() {
  const double p1 = price_from_expected_utilities(-0.8810, -0.8139, 1.0);
  const double p2 = price_from_expected_utilities(-0.8816, -0.8142, 1.0);
  const bool pass = std::abs(p1 - 0.0792) <= 1e-4 && std::abs(p2 - 0.0796) <= 1e-4;
  outcome("A5", pass,
          "price_from_utilities p(-0.8810,-0.8139)=" + fmt(p1) +
              " (0.0792±1e-4) p(-0.8816,-0.8142)=" + fmt(p2) + " (0.0796±1e-4)");
}

// ---- A6: price error shrinks with the sample count ------------------------

void a6_convergence() {
  RunConfig cfg = RunConfig::from_string(
      "mu = 0.1\n"
      "sigma = 0.2\n"
      "s0 = 1\n"
      "T = 1\n"
      "K = 50\n"
      "claim = put:1\n"
      "basis = poly:2\n"
      "gamma = 1\n"
      "seed = 61\n");
  cfg.resolve();
  const std::vector<std::int64_t> n_list = {1000, 10000, 100000};
  const int n_seeds = 5;
  const std::vector<ConvergenceRow> rows = convergence_study(cfg, n_list, n_seeds);

  std::vector<double> medians;
  for (std::int64_t n : n_list) {
    std::vector<double> errs;
    for (const ConvergenceRow& r : rows) {
      if (r.n_paths == n) errs.push_back(std::abs(r.price - 0.0797));
    }
    std::sort(errs.begin(), errs.end());
    medians.push_back(errs[errs.size() / 2]);
  }

  // Least-squares slope of log median error against log n.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    const double x = std::log(static_cast<double>(n_list[i]));
    const double y = std::log(medians[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double k = static_cast<double>(n_list.size());
  const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);

  const bool shrinks = medians[2] < medians[0];
  const bool slope_ok = slope >= -1.0 && slope <= -0.2;
  outcome("A6", shrinks && slope_ok,
          "convergence seeds=5 med_err(1e3)=" + fmt(medians[0]) +
              " med_err(1e4)=" + fmt(medians[1]) + " med_err(1e5)=" +
              fmt(medians[2]) + " slope=" + fmt(slope) + " (in [-1.0,-0.2])");
}

// ---- A7: optimizer property suite -----------------------------------------

ObjectiveData constant_instance(std::vector<double> increments,
                                std::vector<double> carry) {
  ObjectiveData data;
  data.n_paths = static_cast<int>(increments.size());
  data.n_features = 1;
  data.n_assets = 1;
  data.features.assign(increments.size(), 1.0);
  data.increments = std::move(increments);
  data.carry = std::move(carry);
  data.gamma = 1.0;
  return data;
}

void a7_optimizer_suite() {
  std::mt19937 gen(90210);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(-0.5, 0.5);

  // Gradients against central finite differences.
  double worst_fd = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int d = (trial % 3 == 0) ? 2 : 1;
    const int R = 2, n = 16;
    ObjectiveData data;
    data.n_paths = n;
    data.n_features = R;
    data.n_assets = d;
    data.gamma = 1.0;
    data.features.resize(static_cast<std::size_t>(n) * R);
    data.increments.resize(static_cast<std::size_t>(n) * d);
    data.carry.resize(n);
    for (int i = 0; i < n; ++i) {
      data.features[static_cast<std::size_t>(i) * R] = 1.0;
      data.features[static_cast<std::size_t>(i) * R + 1] = normal(gen);
      for (int j = 0; j < d; ++j) {
        data.increments[static_cast<std::size_t>(i) * d + j] = normal(gen);
      }
      data.carry[i] = unif(gen);
    }
    Eigen::MatrixXd c(d, R);
    for (int j = 0; j < d; ++j)
      for (int r = 0; r < R; ++r) c(j, r) = 0.3 * normal(gen);

    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
    gradient_hessian(data, c, grad, hess);
    const double step = 1e-6;
    for (int j = 0; j < d; ++j) {
      for (int r = 0; r < R; ++r) {
        Eigen::MatrixXd up = c, dn = c;
        up(j, r) += step;
        dn(j, r) -= step;
        const double fd = (objective(data, up) - objective(data, dn)) / (2 * step);
        const double g = grad(j * R + r);
        worst_fd = std::max(worst_fd, std::abs(fd - g) / std::max(1.0, std::abs(g)));
      }
    }
  }

  // Closed-form two-path optimum.
  const OptimResult two = minimize(constant_instance({2.0, -1.0}, {0.0, 0.0}));
  const double arg_err = std::abs(two.coefficients(0, 0) - std::log(2.0) / 3.0);

  // One-sided increments.
  const OptimResult oneside = minimize(constant_instance({1.0, 1.0}, {0.0, 0.0}));
  const bool unbounded_ok = oneside.status == OptimStatus::unbounded;

  // Brute-force scan agreement on tiny instances.
  double worst_brute = 0.0;
  int brute_checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(gen() % 7);
    std::vector<double> inc(n), carry(n);
    bool pos = false, neg = false;
    for (int i = 0; i < n; ++i) {
      inc[i] = normal(gen);
      pos = pos || inc[i] > 0;
      neg = neg || inc[i] < 0;
      carry[i] = unif(gen);
    }
    if (!pos || !neg) continue;
    const ObjectiveData data = constant_instance(inc, carry);
    const OptimResult res = minimize(data);
    if (res.status != OptimStatus::converged) continue;

    auto value = [&](double h) {
      Eigen::MatrixXd c(1, 1);
      c << h;
      return objective_log(data, c);
    };
    double lo = -50.0, hi = 50.0, best = 0.0, besty = value(0.0);
    for (int g = 0; g <= 2000; ++g) {
      const double x = lo + (hi - lo) * g / 2000.0;
      const double y = value(x);
      if (y < besty) {
        besty = y;
        best = x;
      }
    }
    double a = best - 0.05, b = best + 0.05;
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c1 = b - phi * (b - a), d1 = a + phi * (b - a);
    double f1 = value(c1), f2 = value(d1);
    while (b - a > 1e-9) {
      if (f1 < f2) {
        b = d1; d1 = c1; f2 = f1;
        c1 = b - phi * (b - a);
        f1 = value(c1);
      } else {
        a = c1; c1 = d1; f1 = f2;
        d1 = a + phi * (b - a);
        f2 = value(d1);
      }
    }
    worst_brute = std::max(worst_brute,
                           std::abs(res.coefficients(0, 0) - 0.5 * (a + b)));
    ++brute_checked;
  }

  const bool pass = worst_fd <= 1e-6 && arg_err <= 1e-8 && unbounded_ok &&
                    worst_brute <= 1e-6 && brute_checked >= 10;
  outcome("A7", pass,
          "optimizer_suite fd_rel_err=" + fmt(worst_fd) +
              " (<=1e-6) two_path_arg_err=" + fmt(arg_err) +
              " (<=1e-8) one_sided=" +
              (unbounded_ok ? "unbounded" : to_string(oneside.status)) +
              " brute_err=" + fmt(worst_brute) + " (<=1e-6, " +
              fmt(brute_checked) + " instances)");
}

// ---- A8: pipeline invariants ----------------------------------------------

void a8_pipeline_invariants() {
  bool all = true;
  std::string detail;

  // Single-step learning collapses to one solver call.
  {
    const PathSet paths(2, 1, 1, {2.0, 4.0, 2.0, 1.0});
    const BasisSet basis = BasisSet::poly(2, Eigen::VectorXd::Constant(1, 2.0));
    const StrategyTable table = learn(paths, Claim::zero(), basis, 1.0);
    ObjectiveData data;
    data.n_paths = 2;
    data.n_features = 1;
    data.n_assets = 1;
    data.gamma = 1.0;
    data.features = {1.0, 1.0};
    data.increments = {1.0, -0.5};
    data.carry = {-0.0, -0.0};
    const OptimResult direct = minimize(data);
    const bool ok =
        table.first_step_holdings()(0) == direct.coefficients(0, 0) / 2.0 &&
        table.log_psi1() == direct.log_objective;
    all = all && ok;
    detail += std::string("single_step=") + (ok ? "exact" : "MISMATCH");
  }

  // Bit-exact determinism of the full learn pipeline.
  {
    const MarketParams m = MarketParams::one_asset(0.1, 0.2, 0.0, 1.0, 1.0, 10);
    const BasisSet basis = BasisSet::poly(2, m.spot0());
    const PathSet p1 = simulate_gbm(m, {4000, 77, false});
    const PathSet p2 = simulate_gbm(m, {4000, 77, false});
    const StrategyTable t1 = learn(p1, Claim::put(1.0), basis, 1.0);
    const StrategyTable t2 = learn(p2, Claim::put(1.0), basis, 1.0);
    bool ok = p1.raw_states() == p2.raw_states() &&
              t1.log_psi1() == t2.log_psi1() &&
              t1.first_step_holdings() == t2.first_step_holdings();
    for (int k = 2; ok && k <= 10; ++k) {
      ok = t1.rule(k).coeffs == t2.rule(k).coeffs;
    }
    const std::vector<double> pnl1 = apply(t1, Claim::put(1.0), p1);
    const std::vector<double> pnl2 = apply(t2, Claim::put(1.0), p2);
    ok = ok && pnl1 == pnl2;
    all = all && ok;
    detail += std::string(" determinism=") + (ok ? "bit_exact" : "MISMATCH");
  }

  // Buyer/seller antisymmetry with no tolerance.
  {
    const MarketParams m = MarketParams::one_asset(0.1, 0.2, 0.0, 1.0, 1.0, 10);
    const BasisSet basis = BasisSet::poly(2, m.spot0());
    const PathSet paths = simulate_gbm(m, {4000, 31, false});
    const CertaintyEquivalent ce_m =
        certainty_equivalent(learn(paths, Claim::zero(), basis, 1.0));
    const CertaintyEquivalent ce_c =
        certainty_equivalent(learn(paths, Claim::put(1.0), basis, 1.0));
    const double buyer = indifference_price(ce_c, ce_m, PriceSide::buyer);
    const double seller_neg = indifference_price(ce_c, ce_m, PriceSide::seller);
    const bool ok = buyer == -seller_neg;
    all = all && ok;
    detail += std::string(" antisymmetry=") + (ok ? "exact" : "MISMATCH");
  }

  // Risk report against a sort-based oracle at n = 1000.
  {
    std::mt19937 gen(5150);
    std::normal_distribution<double> normal(0.1, 0.5);
    std::vector<double> x(1000);
    for (double& v : x) v = normal(gen);
    const RiskReport r = report(x);

    std::vector<double> sorted = x;
    std::sort(sorted.begin(), sorted.end());
    bool ok = true;
    for (double c : {0.90, 0.99}) {
      const std::size_t rank =
          static_cast<std::size_t>(std::ceil((1.0 - c) * sorted.size()));
      const double q = sorted[rank - 1];
      double tail = 0.0;
      std::size_t cnt = 0;
      for (double v : sorted) {
        if (v <= q) {
          tail += v;
          ++cnt;
        } else {
          break;
        }
      }
      ok = ok && r.var_at(c) == q &&
           std::abs(r.cvar_at(c) - tail / cnt) <= 1e-13 * std::abs(tail / cnt);
    }
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= x.size();
    ok = ok && std::abs(r.mean - mean) <= 1e-13;
    all = all && ok;
    detail += std::string(" risk_oracle=") + (ok ? "agrees" : "MISMATCH");
  }

  outcome("A8", all, "pipeline_invariants " + detail);
}

}  // namespace

int main() {
  try {
    a1_black_scholes_put();
    a2_a3_theoretical_replays();
    a4_learned_price();
    a5_price_from_utilities();
    a6_convergence();
    a7_optimizer_suite();
    a8_pipeline_invariants();
  } catch (const std::exception& e) {
    std::printf("ABORT unexpected error: %s\n", e.what());
    return 1;
  }
  if (g_failures > 0) {
    std::printf("acceptance: %d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("acceptance: all criteria passed\n");
  return 0;
}

#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "exphedge/analytic.hpp"
#include "exphedge/claims.hpp"
#include "exphedge/errors.hpp"
#include "exphedge/market.hpp"
#include "exphedge/math.hpp"

using namespace exphedge;

namespace {

MarketParams benchmark_market(int n_steps = 50) {
  return MarketParams::one_asset(0.1, 0.2, 0.0, 1.0, 1.0, n_steps);
}

// Lognormal expectation of the put payoff by composite Simpson quadrature,
// sharing nothing with the closed form under test.
double put_price_by_quadrature(double spot, double strike, double vol,
                               double maturity) {
  const double s = vol * std::sqrt(maturity);
  const double m = -0.5 * s * s;
  // S_T = spot * exp(m + s z) <= strike iff z <= z_star.
  const double z_star = (std::log(strike / spot) - m) / s;
  const double lo = -14.0;
  const int n = 40000;  // even
  const double h = (z_star - lo) / n;
  auto f = [&](double z) {
    const double st = spot * std::exp(m + s * z);
    return (strike - st) * norm_pdf(z);
  };
  double sum = f(lo) + f(z_star);
  for (int i = 1; i < n; ++i) sum += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

}  // namespace

TEST_CASE("at-the-money put value") {
  const BsQuote q = bs_put(1.0, 1.0, 0.2, 0.0, 1.0);
  CHECK(std::abs(q.price - 0.0797) < 2e-4);
  CHECK(q.price == doctest::Approx(0.079655674554058).epsilon(1e-12));
  CHECK(q.delta == doctest::Approx(norm_cdf(0.1) - 1.0).epsilon(1e-12));
}

TEST_CASE("put value agrees with direct quadrature of the payoff") {
  const BsQuote q = bs_put(0.9, 1.0, 0.2, 0.0, 1.0);
  const double oracle = put_price_by_quadrature(0.9, 1.0, 0.2, 1.0);
  CHECK(std::abs(q.price - oracle) < 1e-8);
}

TEST_CASE("deep in-the-money put approaches intrinsic value") {
  const BsQuote q = bs_put(1e-6, 1.0, 0.2, 0.0, 1.0);
  CHECK(q.price == doctest::Approx(1.0 - 1e-6).epsilon(1e-9));
  CHECK(q.delta == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("put values respect arbitrage bounds") {
  std::mt19937 gen(42);
  std::uniform_real_distribution<double> spot(0.3, 3.0), vol(0.05, 0.8),
      rate(-0.02, 0.08), mat(0.1, 5.0);
  for (int t = 0; t < 200; ++t) {
    const double S = spot(gen), v = vol(gen), r = rate(gen), T = mat(gen);
    const BsQuote q = bs_put(S, 1.0, v, r, T);
    const double disc_strike = std::exp(-r * T);
    CHECK(q.price >= std::max(disc_strike - S, 0.0) - 1e-12);
    CHECK(q.price <= disc_strike + 1e-12);
    CHECK(q.delta >= -1.0 - 1e-12);
    CHECK(q.delta <= 0.0 + 1e-12);
  }
}

TEST_CASE("put call parity") {
  for (double spot : {0.7, 1.0, 1.6}) {
    const BsQuote p = bs_put(spot, 1.0, 0.25, 0.03, 2.0);
    const BsQuote c = bs_call(spot, 1.0, 0.25, 0.03, 2.0);
    CHECK(c.price - p.price ==
          doctest::Approx(spot - std::exp(-0.03 * 2.0)).epsilon(1e-12));
  }
}

TEST_CASE("quote input validation") {
  CHECK_THROWS_AS(bs_put(-1.0, 1.0, 0.2, 0.0, 1.0), InvalidParams);
  CHECK_THROWS_AS(bs_put(1.0, 0.0, 0.2, 0.0, 1.0), InvalidParams);
  CHECK_THROWS_AS(bs_put(1.0, 1.0, -0.2, 0.0, 1.0), InvalidParams);
  CHECK_THROWS_AS(bs_put(1.0, 1.0, 0.2, 0.0, 0.0), InvalidParams);
}

TEST_CASE("claim-free optimal holding closed forms") {
  const MarketParams m = benchmark_market();
  Eigen::VectorXd spot = Eigen::VectorXd::Ones(1);
  CHECK(merton_holding(m, 1.0, spot)(0) == doctest::Approx(2.5).epsilon(1e-13));

  const MarketParams flat = MarketParams::one_asset(0.05, 0.2, 0.05, 1.0, 1.0, 50);
  CHECK(merton_holding(flat, 1.0, spot)(0) == doctest::Approx(0.0).scale(1.0));

  spot(0) = 2.0;
  CHECK(merton_holding(m, 1.0, spot)(0) == doctest::Approx(1.25).epsilon(1e-13));
}

TEST_CASE("holding times spot is a constant dollar amount") {
  const MarketParams m = benchmark_market();
  std::mt19937 gen(8);
  std::uniform_real_distribution<double> unif(0.2, 4.0);
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd spot = Eigen::VectorXd::Constant(1, unif(gen));
    CHECK(merton_holding(m, 1.0, spot)(0) * spot(0) ==
          doctest::Approx(2.5).epsilon(1e-12));
  }
}

TEST_CASE("claim-free certainty equivalent closed forms") {
  const MarketParams m = benchmark_market();
  CHECK(merton_certainty_equivalent(m, 0.0) == doctest::Approx(-0.125).epsilon(1e-14));
  CHECK(merton_certainty_equivalent(m, 1.0) == doctest::Approx(0.0).scale(1.0));

  const MarketParams flat = MarketParams::one_asset(0.05, 0.2, 0.05, 1.0, 1.0, 50);
  CHECK(merton_certainty_equivalent(flat, 0.0) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("hedge of a received put adds the negated delta") {
  const MarketParams m = benchmark_market();
  const Eigen::VectorXd spot = Eigen::VectorXd::Ones(1);

  const Eigen::VectorXd base =
      theoretical_hedge(m, 1.0, Claim::zero(), spot, 0.0);
  CHECK(base(0) == doctest::Approx(2.5).epsilon(1e-13));

  const Eigen::VectorXd put_buyer =
      theoretical_hedge(m, 1.0, Claim::put(1.0), spot, 0.0);
  const double delta = norm_cdf(0.1) - 1.0;  // about -0.4602
  CHECK(put_buyer(0) == doctest::Approx(2.5 - delta).epsilon(1e-12));
  CHECK(put_buyer(0) == doctest::Approx(2.9602).epsilon(1e-4));

  const Eigen::VectorXd put_seller =
      theoretical_hedge(m, 1.0, Claim::put(1.0).negated(), spot, 0.0);
  CHECK(put_seller(0) == doctest::Approx(2.5 + delta).epsilon(1e-12));

  const Eigen::VectorXd far = Eigen::VectorXd::Constant(1, 1e6);
  const Eigen::VectorXd otm =
      theoretical_hedge(m, 1.0, Claim::put(1.0), far, 0.0);
  CHECK(otm(0) == doctest::Approx(merton_holding(m, 1.0, far)(0)).epsilon(1e-12));
}

TEST_CASE("custom claims have no closed-form hedge") {
  register_custom_claim("flat_payout", [](const Eigen::VectorXd&) { return 1.0; });
  const MarketParams m = benchmark_market();
  CHECK_THROWS_AS(theoretical_hedge(m, 1.0, parse_claim("custom:flat_payout"),
                                    Eigen::VectorXd::Ones(1), 0.0),
                  NotImplemented);
  CHECK_THROWS_AS(TheoreticalStrategy(m, 1.0, parse_claim("custom:flat_payout")),
                  NotImplemented);
}

TEST_CASE("risk-neutral claim value in the lognormal market") {
  const MarketParams m = benchmark_market();
  CHECK(bs_price_indifference_oracle(m, Claim::put(1.0)) ==
        doctest::Approx(0.079655674554058).epsilon(1e-12));
  CHECK(bs_price_indifference_oracle(m, Claim::put(1.0).negated()) ==
        doctest::Approx(-0.079655674554058).epsilon(1e-12));
  CHECK(bs_price_indifference_oracle(m, Claim::zero()) == 0.0);
}

TEST_CASE("weekly delta hedging tracks the put payoff") {
  const MarketParams m = benchmark_market(50);
  const PathSet paths = simulate_gbm(m, {10000, 19, false});
  const double price = bs_price_indifference_oracle(m, Claim::put(1.0));
  const double dt = m.dt();

  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < paths.n_paths(); ++i) {
    double gain = 0.0;
    for (int k = 1; k <= 50; ++k) {
      const double s = paths.state(i, k - 1, 0);
      const double tau = 1.0 - (k - 1) * dt;
      const double delta = bs_put(s, 1.0, 0.2, 0.0, tau).delta;
      gain += delta * paths.increment(i, k - 1, 0);
    }
    const double payoff = std::max(1.0 - paths.state(i, 50, 0), 0.0);
    const double residual = payoff - price - gain;
    sum += residual;
    sumsq += residual * residual;
  }
  const double n = paths.n_paths();
  const double mean = sum / n;
  const double sd = std::sqrt((sumsq - n * mean * mean) / (n - 1));
  CHECK(std::abs(mean) < 3.0 * sd / std::sqrt(n) + 1e-3);
  CHECK(sd <= 0.02);
}

TEST_CASE("closed-form strategy exposes the step grid") {
  const MarketParams m = benchmark_market(50);
  const TheoreticalStrategy strat(m, 1.0, Claim::put(1.0));
  CHECK(strat.n_steps() == 50);
  CHECK(strat.n_assets() == 1);

  const Eigen::VectorXd spot = Eigen::VectorXd::Ones(1);
  CHECK(strat.holdings(1, spot)(0) ==
        doctest::Approx(theoretical_hedge(m, 1.0, Claim::put(1.0), spot, 0.0)(0))
            .epsilon(1e-14));
  // Later steps shorten the remaining maturity of the embedded quote.
  const double mid = strat.holdings(26, spot)(0);
  const double expect =
      theoretical_hedge(m, 1.0, Claim::put(1.0), spot, 25.0 * m.dt())(0);
  CHECK(mid == doctest::Approx(expect).epsilon(1e-14));
}

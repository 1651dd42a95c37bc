#include <doctest.h>

#include <cmath>

#include "exphedge/allocation.hpp"
#include "exphedge/analytic.hpp"
#include "exphedge/basis.hpp"
#include "exphedge/claims.hpp"
#include "exphedge/errors.hpp"
#include "exphedge/market.hpp"
#include "exphedge/pricing.hpp"

using namespace exphedge;

namespace {

MarketParams benchmark_market(int n_steps = 50) {
  return MarketParams::one_asset(0.1, 0.2, 0.0, 1.0, 1.0, n_steps);
}

CertaintyEquivalent make_ce(double value, double gamma,
                            const std::string& tag = "") {
  CertaintyEquivalent ce;
  ce.value = value;
  ce.gamma = gamma;
  ce.market_tag = tag;
  return ce;
}

}  // namespace

TEST_CASE("a worthless claim has price zero") {
  const CertaintyEquivalent ce = make_ce(-0.125, 1.0);
  CHECK(indifference_price(ce, ce, PriceSide::buyer) == 0.0);
  CHECK(indifference_price(ce, ce, PriceSide::seller) == 0.0);
}

TEST_CASE("closed-form certainty equivalents price the put at its risk-neutral value") {
  const MarketParams m = benchmark_market();
  const CertaintyEquivalent merton = analytic_merton_ce(m, 1.0);
  CHECK(merton.value == doctest::Approx(-0.125).epsilon(1e-14));

  const CertaintyEquivalent with_put = analytic_claim_ce(m, 1.0, Claim::put(1.0));
  CHECK(with_put.value == doctest::Approx(-0.125 - 0.079655674554058).epsilon(1e-12));

  const double price = indifference_price(with_put, merton, PriceSide::buyer);
  CHECK(price == doctest::Approx(0.079655674554058).epsilon(1e-12));
}

TEST_CASE("learned price derivation from reported expected utilities") {
  CHECK(std::abs(price_from_expected_utilities(-0.8810, -0.8139, 1.0) - 0.0792) < 1e-4);
  CHECK(std::abs(price_from_expected_utilities(-0.8816, -0.8142, 1.0) - 0.0796) < 1e-4);
  CHECK(price_from_expected_utilities(-0.77, -0.77, 2.5) == 0.0);
}

TEST_CASE("expected utilities must be strictly negative") {
  CHECK_THROWS_AS(price_from_expected_utilities(0.0, -0.8, 1.0), NonNegativeUtility);
  CHECK_THROWS_AS(price_from_expected_utilities(-0.8, 0.1, 1.0), NonNegativeUtility);
}

TEST_CASE("certainty equivalents from different books cannot be combined") {
  CHECK_THROWS_AS(
      indifference_price(make_ce(-0.2, 1.0), make_ce(-0.125, 2.0), PriceSide::buyer),
      MixedProvenance);
  CHECK_THROWS_AS(indifference_price(make_ce(-0.2, 1.0, "gbm(a)"),
                                     make_ce(-0.125, 1.0, "gbm(b)"),
                                     PriceSide::buyer),
                  MixedProvenance);
  // An untagged value can be combined with a tagged one.
  CHECK(indifference_price(make_ce(-0.2, 1.0, "gbm(a)"), make_ce(-0.125, 1.0),
                           PriceSide::buyer) ==
        doctest::Approx(0.075).epsilon(1e-14));
}

TEST_CASE("buyer and seller prices are antisymmetric under claim negation") {
  const MarketParams m = benchmark_market(10);
  const PathSet paths = simulate_gbm(m, {4000, 3, false});
  const BasisSet basis = BasisSet::poly(2, m.spot0());

  const StrategyTable merton = learn(paths, Claim::zero(), basis, 1.0);
  const StrategyTable receive_put = learn(paths, Claim::put(1.0), basis, 1.0);
  const StrategyTable owe_put = learn(paths, Claim::put(1.0).negated(), basis, 1.0);

  const CertaintyEquivalent ce_m = certainty_equivalent(merton);
  const CertaintyEquivalent ce_r = certainty_equivalent(receive_put);
  const CertaintyEquivalent ce_o = certainty_equivalent(owe_put);

  // Buying the put against selling the negated put: same trade, equal and
  // opposite prices, with no tolerance.
  const double buyer = indifference_price(ce_r, ce_m, PriceSide::buyer);
  const double seller_of_negated = indifference_price(ce_r, ce_m, PriceSide::seller);
  CHECK(buyer == -seller_of_negated);

  // The two sides of the same put quote a positive spread.
  const double seller_of_put = indifference_price(ce_o, ce_m, PriceSide::seller);
  CHECK(seller_of_put > buyer);
}

TEST_CASE("prices derived from utilities match certainty-equivalent differences") {
  const MarketParams m = benchmark_market(5);
  const PathSet paths = simulate_gbm(m, {2000, 12, false});
  const BasisSet basis = BasisSet::poly(1, m.spot0());
  const double gamma = 1.0;

  const StrategyTable merton = learn(paths, Claim::zero(), basis, gamma);
  const StrategyTable claim = learn(paths, Claim::put(1.0), basis, gamma);

  const double direct = indifference_price(certainty_equivalent(claim),
                                           certainty_equivalent(merton),
                                           PriceSide::buyer);
  const double u_merton = -std::exp(gamma * merton.certainty_equivalent());
  const double u_claim = -std::exp(gamma * claim.certainty_equivalent());
  const double from_u = price_from_expected_utilities(u_merton, u_claim, gamma);
  CHECK(from_u == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("learned certainty equivalents carry their provenance") {
  const MarketParams m = benchmark_market(5);
  const PathSet paths = simulate_gbm(m, {500, 21, false});
  LearnOptions opts;
  opts.training_seed = 21;
  const StrategyTable table =
      learn(paths, Claim::zero(), BasisSet::poly(1, m.spot0()), 1.0, opts);
  const CertaintyEquivalent ce = certainty_equivalent(table);

  CHECK(ce.provenance == Provenance::learned);
  CHECK(ce.n_paths == 500);
  CHECK(ce.seed == 21);
  CHECK(ce.basis == "poly:1");
  CHECK(ce.market_tag == m.tag());
  CHECK(ce.value == doctest::Approx(table.certainty_equivalent()).epsilon(1e-15));
}

TEST_CASE("complete-market expectation price delegates to the claim oracle") {
  const MarketParams m = benchmark_market();
  CHECK(davis_price_complete(m, Claim::put(1.0)) ==
        bs_price_indifference_oracle(m, Claim::put(1.0)));
  CHECK(davis_price_complete(m, Claim::zero()) == 0.0);
}

TEST_CASE("pricing result assembles both books") {
  const MarketParams m = benchmark_market();
  const PricingResult res = make_pricing_result(
      analytic_claim_ce(m, 1.0, Claim::put(1.0)), analytic_merton_ce(m, 1.0),
      PriceSide::buyer);
  CHECK(res.gamma == 1.0);
  CHECK(res.side == PriceSide::buyer);
  CHECK(res.indifference_price == doctest::Approx(0.079655674554058).epsilon(1e-12));
}

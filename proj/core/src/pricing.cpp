#include "exphedge/pricing.hpp"

#include <cmath>

#include "exphedge/analytic.hpp"
#include "exphedge/errors.hpp"

namespace exphedge {

const char* to_string(PriceSide side) {
  return side == PriceSide::buyer ? "buyer" : "seller";
}

CertaintyEquivalent certainty_equivalent(const StrategyTable& table) {
  CertaintyEquivalent ce;
  ce.value = table.certainty_equivalent();
  ce.gamma = table.gamma();
  ce.market_tag = table.market_tag();
  ce.provenance = Provenance::learned;
  ce.n_paths = table.n_training_paths();
  ce.seed = table.training_seed();
  ce.basis = table.basis().descriptor();
  return ce;
}

CertaintyEquivalent analytic_merton_ce(const MarketParams& params, double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw InvalidParams("pricing: gamma must be positive");
  }
  CertaintyEquivalent ce;
  ce.value = merton_certainty_equivalent(params, 0.0);
  ce.gamma = gamma;
  ce.market_tag = params.tag();
  ce.provenance = Provenance::analytic;
  return ce;
}

CertaintyEquivalent analytic_claim_ce(const MarketParams& params, double gamma,
                                      const Claim& claim) {
  CertaintyEquivalent ce = analytic_merton_ce(params, gamma);
  // Receiving the claim shifts the certainty equivalent by the risk-neutral
  // value of the induced liability, -E_Q[payoff].
  ce.value -= bs_price_indifference_oracle(params, claim);
  return ce;
}

double indifference_price(const CertaintyEquivalent& ce_claim,
                          const CertaintyEquivalent& ce_merton,
                          PriceSide side) {
  if (ce_claim.gamma != ce_merton.gamma) {
    throw MixedProvenance("pricing: certainty equivalents use different gamma");
  }
  if (!ce_claim.market_tag.empty() && !ce_merton.market_tag.empty() &&
      ce_claim.market_tag != ce_merton.market_tag) {
    throw MixedProvenance("pricing: certainty equivalents from different markets");
  }
  return side == PriceSide::buyer ? ce_merton.value - ce_claim.value
                                  : ce_claim.value - ce_merton.value;
}

double price_from_expected_utilities(double u_merton, double u_claim,
                                     double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw InvalidParams("pricing: gamma must be positive");
  }
  if (!(u_merton < 0.0) || !(u_claim < 0.0)) {
    throw NonNegativeUtility("pricing: exponential-utility values must be negative");
  }
  return (std::log(-u_merton) - std::log(-u_claim)) / gamma;
}

double davis_price_complete(const MarketParams& params, const Claim& claim) {
  return bs_price_indifference_oracle(params, claim);
}

PricingResult make_pricing_result(const CertaintyEquivalent& ce_claim,
                                  const CertaintyEquivalent& ce_merton,
                                  PriceSide side) {
  PricingResult out;
  out.ce_claim = ce_claim;
  out.ce_merton = ce_merton;
  out.indifference_price = indifference_price(ce_claim, ce_merton, side);
  out.side = side;
  out.gamma = ce_claim.gamma;
  return out;
}

}  // namespace exphedge

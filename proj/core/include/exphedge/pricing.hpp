#pragma once

#include <cstdint>
#include <string>

#include "exphedge/allocation.hpp"
#include "exphedge/claims.hpp"
#include "exphedge/market.hpp"

namespace exphedge {

enum class Provenance { analytic, learned };
enum class PriceSide { buyer, seller };

const char* to_string(PriceSide side);

// Certainty equivalent of optimally hedged terminal wealth, together with
// enough provenance to refuse combining incompatible values.
struct CertaintyEquivalent {
  double value = 0.0;
  double gamma = 0.0;
  std::string market_tag;
  Provenance provenance = Provenance::analytic;
  std::int64_t n_paths = 0;   // learned only
  std::uint64_t seed = 0;     // learned only
  std::string basis;          // learned only
};

CertaintyEquivalent certainty_equivalent(const StrategyTable& table);

CertaintyEquivalent analytic_merton_ce(const MarketParams& params, double gamma);

// Certainty equivalent with the claim RECEIVED. A seller prices by passing
// the negated claim.
CertaintyEquivalent analytic_claim_ce(const MarketParams& params, double gamma,
                                      const Claim& claim);

// buyer: ce_merton - ce_claim (claim received); seller: ce_claim - ce_merton
// (ce_claim computed with the claim owed, i.e. received-negated). Both
// inputs must share gamma and market.
double indifference_price(const CertaintyEquivalent& ce_claim,
                          const CertaintyEquivalent& ce_merton, PriceSide side);

// (1/gamma) (log(-u_merton) - log(-u_claim)) from reported expected
// utilities E[-exp(-gamma X)]. Matches the buyer-side indifference price.
double price_from_expected_utilities(double u_merton, double u_claim,
                                     double gamma);

// E_Q[payoff] in this complete lognormal market. The name records that the
// value is specific to complete markets; incomplete extensions must not
// reuse it silently.
double davis_price_complete(const MarketParams& params, const Claim& claim);

struct PricingResult {
  CertaintyEquivalent ce_claim;
  CertaintyEquivalent ce_merton;
  double indifference_price = 0.0;
  PriceSide side = PriceSide::buyer;
  double gamma = 0.0;
};

PricingResult make_pricing_result(const CertaintyEquivalent& ce_claim,
                                  const CertaintyEquivalent& ce_merton,
                                  PriceSide side);

}  // namespace exphedge

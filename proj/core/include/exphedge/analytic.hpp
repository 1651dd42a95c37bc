#pragma once

#include <Eigen/Dense>

#include "exphedge/allocation.hpp"
#include "exphedge/claims.hpp"
#include "exphedge/market.hpp"

namespace exphedge {

struct BsQuote {
  double price = 0.0;
  double delta = 0.0;
  double spot = 0.0;
  double strike = 0.0;
  double vol = 0.0;
  double rate = 0.0;
  double maturity = 0.0;
};

BsQuote bs_put(double spot, double strike, double vol, double rate,
               double maturity);
BsQuote bs_call(double spot, double strike, double vol, double rate,
                double maturity);

// Optimal holding with no claim: shares_j = [(sigma sigma^T)^{-1}(mu - r 1)]_j
// / (gamma * spot_j). A constant dollar amount per asset.
Eigen::VectorXd merton_holding(const MarketParams& params, double gamma,
                               const Eigen::VectorXd& spot);

// Certainty equivalent of the optimally invested claim-free book at time t:
// ||lambda||^2 (t - T) / 2. Nonpositive; more negative means more attainable
// outperformance over the remaining horizon.
double merton_certainty_equivalent(const MarketParams& params, double t);

// Optimal holding with the claim: Merton piece plus the replicating holding
// of the claim liability. Supports zero, put and call claims (and their
// negations) on the first asset; custom payoffs have no closed form here.
Eigen::VectorXd theoretical_hedge(const MarketParams& params, double gamma,
                                  const Claim& claim,
                                  const Eigen::VectorXd& state, double t);

// E_Q[payoff]: the indifference price of the claim in this complete market.
// Prices are in discounted units, so vanilla quotes use rate 0 and the first
// asset's lognormal volatility.
double bs_price_indifference_oracle(const MarketParams& params,
                                    const Claim& claim);

// Closed-form hedge as a replayable strategy on the step grid.
class TheoreticalStrategy final : public HedgingStrategy {
 public:
  TheoreticalStrategy(MarketParams params, double gamma, Claim claim);

  Eigen::VectorXd holdings(int step, const Eigen::VectorXd& state) const override;
  int n_steps() const override { return params_.n_steps(); }
  int n_assets() const override { return params_.n_assets(); }

  const MarketParams& params() const { return params_; }
  double gamma() const { return gamma_; }
  const Claim& claim() const { return claim_; }

 private:
  MarketParams params_;
  double gamma_;
  Claim claim_;
};

}  // namespace exphedge

#include "exphedge/analytic.hpp"

#include <cmath>
#include <utility>

#include "exphedge/errors.hpp"
#include "exphedge/math.hpp"

namespace exphedge {

namespace {

void check_bs_inputs(double spot, double strike, double vol, double maturity) {
  if (!(spot > 0.0) || !(strike > 0.0) || !(vol > 0.0) || !(maturity > 0.0) ||
      !std::isfinite(spot) || !std::isfinite(strike) || !std::isfinite(vol) ||
      !std::isfinite(maturity)) {
    throw InvalidParams("black-scholes: spot, strike, vol, maturity must be positive");
  }
}

}  // namespace

BsQuote bs_call(double spot, double strike, double vol, double rate,
                double maturity) {
  check_bs_inputs(spot, strike, vol, maturity);
  if (!std::isfinite(rate)) throw InvalidParams("black-scholes: rate must be finite");
  const double sd = vol * std::sqrt(maturity);
  const double d1 =
      (std::log(spot / strike) + (rate + 0.5 * vol * vol) * maturity) / sd;
  const double d2 = d1 - sd;
  BsQuote q;
  q.price = spot * norm_cdf(d1) - strike * std::exp(-rate * maturity) * norm_cdf(d2);
  q.delta = norm_cdf(d1);
  q.spot = spot;
  q.strike = strike;
  q.vol = vol;
  q.rate = rate;
  q.maturity = maturity;
  return q;
}

BsQuote bs_put(double spot, double strike, double vol, double rate,
               double maturity) {
  check_bs_inputs(spot, strike, vol, maturity);
  if (!std::isfinite(rate)) throw InvalidParams("black-scholes: rate must be finite");
  const double sd = vol * std::sqrt(maturity);
  const double d1 =
      (std::log(spot / strike) + (rate + 0.5 * vol * vol) * maturity) / sd;
  const double d2 = d1 - sd;
  BsQuote q;
  q.price = strike * std::exp(-rate * maturity) * norm_cdf(-d2) -
            spot * norm_cdf(-d1);
  q.delta = norm_cdf(d1) - 1.0;
  q.spot = spot;
  q.strike = strike;
  q.vol = vol;
  q.rate = rate;
  q.maturity = maturity;
  return q;
}

Eigen::VectorXd merton_holding(const MarketParams& params, double gamma,
                               const Eigen::VectorXd& spot) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw InvalidParams("merton: gamma must be positive");
  }
  if (spot.size() != params.n_assets()) {
    throw DimensionMismatch("merton: spot has wrong number of assets");
  }
  if ((spot.array() <= 0.0).any() || !spot.allFinite()) {
    throw InvalidParams("merton: spot prices must be positive");
  }
  const Eigen::VectorXd excess =
      params.drift() - Eigen::VectorXd::Constant(params.n_assets(), params.rate());
  const Eigen::VectorXd dollars = params.covariance().ldlt().solve(excess) / gamma;
  return dollars.cwiseQuotient(spot);
}

double merton_certainty_equivalent(const MarketParams& params, double t) {
  if (!(t >= 0.0) || t > params.horizon()) {
    throw InvalidParams("merton: t must lie in [0, T]");
  }
  return 0.5 * params.lambda().squaredNorm() * (t - params.horizon());
}

namespace {

// Replicating holding of the RECEIVED claim in discounted units. The hedge
// must offset the liability -claim, so the full hedge subtracts this delta.
double claim_delta(const MarketParams& params, const Claim& claim,
                   double spot1, double tau) {
  const double vol1 = std::sqrt(params.covariance()(0, 0));
  switch (claim.kind()) {
    case Claim::Kind::zero:
      return 0.0;
    case Claim::Kind::put:
      return claim.sign() * bs_put(spot1, claim.strike(), vol1, 0.0, tau).delta;
    case Claim::Kind::call:
      return claim.sign() * bs_call(spot1, claim.strike(), vol1, 0.0, tau).delta;
    case Claim::Kind::custom:
      throw NotImplemented("theoretical hedge: no closed form for custom payoffs");
  }
  throw Error("claim: unreachable kind");
}

}  // namespace

Eigen::VectorXd theoretical_hedge(const MarketParams& params, double gamma,
                                  const Claim& claim,
                                  const Eigen::VectorXd& state, double t) {
  if (!(t >= 0.0) || !(t < params.horizon())) {
    throw InvalidParams("theoretical hedge: t must lie in [0, T)");
  }
  Eigen::VectorXd h = merton_holding(params, gamma, state);
  if (claim.is_zero()) return h;
  const double tau = params.horizon() - t;
  // Receiving the claim leaves liability -claim, whose replicating holding
  // is minus the received payoff's delta, carried on the first asset.
  h[0] -= claim_delta(params, claim, state[0], tau);
  return h;
}

double bs_price_indifference_oracle(const MarketParams& params,
                                    const Claim& claim) {
  const double vol1 = std::sqrt(params.covariance()(0, 0));
  const double s1 = params.spot0()[0];
  switch (claim.kind()) {
    case Claim::Kind::zero:
      return 0.0;
    case Claim::Kind::put:
      return claim.sign() *
             bs_put(s1, claim.strike(), vol1, 0.0, params.horizon()).price;
    case Claim::Kind::call:
      return claim.sign() *
             bs_call(s1, claim.strike(), vol1, 0.0, params.horizon()).price;
    case Claim::Kind::custom:
      throw NotImplemented("indifference oracle: no closed form for custom payoffs");
  }
  throw Error("claim: unreachable kind");
}

TheoreticalStrategy::TheoreticalStrategy(MarketParams params, double gamma,
                                         Claim claim)
    : params_(std::move(params)), gamma_(gamma), claim_(std::move(claim)) {
  if (!(gamma_ > 0.0) || !std::isfinite(gamma_)) {
    throw InvalidParams("theoretical strategy: gamma must be positive");
  }
  if (claim_.kind() == Claim::Kind::custom) {
    throw NotImplemented("theoretical strategy: no closed form for custom payoffs");
  }
}

Eigen::VectorXd TheoreticalStrategy::holdings(int step,
                                              const Eigen::VectorXd& state) const {
  if (step < 1 || step > params_.n_steps()) {
    throw InvalidParams("theoretical strategy: step out of range");
  }
  const double t = (step - 1) * params_.dt();
  return theoretical_hedge(params_, gamma_, claim_, state, t);
}

}  // namespace exphedge

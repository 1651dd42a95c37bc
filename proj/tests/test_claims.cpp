#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "exphedge/claims.hpp"
#include "exphedge/errors.hpp"
#include "exphedge/market.hpp"

using namespace exphedge;

namespace {

Eigen::VectorXd state1(double s) {
  Eigen::VectorXd v(1);
  v << s;
  return v;
}

}  // namespace

TEST_CASE("vanilla payoffs") {
  const Claim put = Claim::put(1.0);
  CHECK(put.payoff(state1(1.2)) == 0.0);
  CHECK(put.payoff(state1(0.8)) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(put.negated().payoff(state1(0.8)) == doctest::Approx(-0.2).epsilon(1e-15));

  const Claim call = Claim::call(1.0);
  CHECK(call.payoff(state1(1.2)) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(call.payoff(state1(0.8)) == 0.0);

  CHECK(Claim::zero().payoff(state1(0.5)) == 0.0);
  CHECK(Claim::zero().payoff(state1(137.0)) == 0.0);
}

TEST_CASE("put call parity at expiry") {
  const Claim put = Claim::put(1.0);
  const Claim call = Claim::call(1.0);
  const MarketParams m = MarketParams::one_asset(0.1, 0.2, 0.0, 1.0, 1.0, 10);
  const PathSet paths = simulate_gbm(m, {256, 21, false});
  for (int i = 0; i < paths.n_paths(); ++i) {
    const double s = paths.state(i, paths.n_steps(), 0);
    const Eigen::VectorXd z = state1(s);
    CHECK(put.payoff(z) - call.payoff(z) + s - 1.0 ==
          doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
  }
}

TEST_CASE("double negation restores the payoff") {
  const Claim c = Claim::put(0.9);
  const Claim nn = c.negated().negated();
  for (double s : {0.3, 0.9, 1.5}) {
    CHECK(nn.payoff(state1(s)) == c.payoff(state1(s)));
  }
  CHECK(nn.spec_string() == c.spec_string());
}

TEST_CASE("claim spec strings round trip") {
  for (const char* spec : {"zero", "put:1", "call:2.5", "-put:1", "-call:0.75"}) {
    const Claim c = parse_claim(spec);
    const Claim back = parse_claim(c.spec_string());
    for (double s : {0.4, 1.0, 2.2}) {
      CHECK(back.payoff(state1(s)) == c.payoff(state1(s)));
    }
  }
}

TEST_CASE("claim spec parser rejects malformed input") {
  CHECK_THROWS_AS(parse_claim(""), InvalidParams);
  CHECK_THROWS_AS(parse_claim("-zero"), InvalidParams);
  CHECK_THROWS_AS(parse_claim("put:"), InvalidParams);
  CHECK_THROWS_AS(parse_claim("put:-1"), InvalidParams);
  CHECK_THROWS_AS(parse_claim("put:1x"), InvalidParams);
  CHECK_THROWS_AS(parse_claim("strangle:1"), InvalidParams);
  CHECK_THROWS_AS(parse_claim("custom:not_registered_anywhere"), InvalidParams);
}

TEST_CASE("custom claims are resolvable once registered") {
  register_custom_claim("parity_gap", [](const Eigen::VectorXd& z) {
    return std::max(1.0 - z[0], 0.0) - std::max(z[0] - 1.0, 0.0);
  });
  const Claim c = parse_claim("custom:parity_gap");
  CHECK(c.payoff(state1(0.8)) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(c.payoff(state1(1.3)) == doctest::Approx(-0.3).epsilon(1e-15));
  const Claim neg = parse_claim("-custom:parity_gap");
  CHECK(neg.payoff(state1(0.8)) == doctest::Approx(-0.2).epsilon(1e-15));
}

TEST_CASE("payoff rejects unusable states") {
  CHECK_THROWS_AS(Claim::put(1.0).payoff(Eigen::VectorXd()), DimensionMismatch);
  CHECK_THROWS_AS(Claim::put(1.0).payoff(state1(std::nan(""))), InvalidParams);
}

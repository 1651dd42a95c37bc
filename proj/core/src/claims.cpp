#include "exphedge/claims.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <utility>

#include "exphedge/errors.hpp"

namespace exphedge {

namespace {

std::map<std::string, std::function<double(const Eigen::VectorXd&)>>&
custom_registry() {
  static std::map<std::string, std::function<double(const Eigen::VectorXd&)>> reg;
  return reg;
}

double parse_strike(const std::string& text) {
  std::size_t used = 0;
  double strike = 0.0;
  try {
    strike = std::stod(text, &used);
  } catch (const std::exception&) {
    throw InvalidParams("claim: bad strike '" + text + "'");
  }
  if (used != text.size() || !(strike > 0.0) || !std::isfinite(strike)) {
    throw InvalidParams("claim: strike must be a positive number, got '" + text + "'");
  }
  return strike;
}

std::string format_strike(double strike) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", strike);
  return buf;
}

}  // namespace

Claim Claim::zero() { return Claim{}; }

Claim Claim::put(double strike) {
  if (!(strike > 0.0) || !std::isfinite(strike)) {
    throw InvalidParams("claim: put strike must be positive");
  }
  Claim c;
  c.kind_ = Kind::put;
  c.strike_ = strike;
  return c;
}

Claim Claim::call(double strike) {
  if (!(strike > 0.0) || !std::isfinite(strike)) {
    throw InvalidParams("claim: call strike must be positive");
  }
  Claim c;
  c.kind_ = Kind::call;
  c.strike_ = strike;
  return c;
}

Claim Claim::custom(std::string name,
                    std::function<double(const Eigen::VectorXd&)> payoff) {
  if (name.empty()) throw InvalidParams("claim: custom name must not be empty");
  if (!payoff) throw InvalidParams("claim: custom payoff must be callable");
  Claim c;
  c.kind_ = Kind::custom;
  c.name_ = std::move(name);
  c.fn_ = std::move(payoff);
  return c;
}

Claim Claim::negated() const {
  Claim c = *this;
  if (c.kind_ != Kind::zero) c.sign_ = -c.sign_;
  return c;
}

std::string Claim::spec_string() const {
  std::string prefix = (sign_ < 0) ? "-" : "";
  switch (kind_) {
    case Kind::zero:
      return "zero";
    case Kind::put:
      return prefix + "put:" + format_strike(strike_);
    case Kind::call:
      return prefix + "call:" + format_strike(strike_);
    case Kind::custom:
      return prefix + "custom:" + name_;
  }
  throw Error("claim: unreachable kind");
}

double Claim::payoff(const Eigen::Ref<const Eigen::VectorXd>& terminal_state) const {
  if (terminal_state.size() < 1) {
    throw DimensionMismatch("claim: terminal state is empty");
  }
  if (!terminal_state.allFinite()) {
    throw InvalidParams("claim: terminal state must be finite");
  }
  switch (kind_) {
    case Kind::zero:
      return 0.0;
    case Kind::put:
      return sign_ * std::max(strike_ - terminal_state[0], 0.0);
    case Kind::call:
      return sign_ * std::max(terminal_state[0] - strike_, 0.0);
    case Kind::custom: {
      const double value = fn_(terminal_state);
      if (!std::isfinite(value)) {
        throw InvalidParams("claim: custom payoff returned a non-finite value");
      }
      return sign_ * value;
    }
  }
  throw Error("claim: unreachable kind");
}

double payoff(const Claim& claim,
              const Eigen::Ref<const Eigen::VectorXd>& terminal_state) {
  return claim.payoff(terminal_state);
}

Claim parse_claim(const std::string& spec) {
  if (spec.empty()) throw InvalidParams("claim: empty spec");
  std::string body = spec;
  bool neg = false;
  if (body.front() == '-') {
    neg = true;
    body.erase(0, 1);
  }
  const auto build = [&]() -> Claim {
    if (body == "zero") {
      if (neg) throw InvalidParams("claim: the zero claim has no negation");
      return Claim::zero();
    }
    if (body.rfind("put:", 0) == 0) return Claim::put(parse_strike(body.substr(4)));
    if (body.rfind("call:", 0) == 0) return Claim::call(parse_strike(body.substr(5)));
    if (body.rfind("custom:", 0) == 0) {
      const std::string name = body.substr(7);
      const auto& reg = custom_registry();
      auto it = reg.find(name);
      if (it == reg.end()) {
        throw InvalidParams("claim: no custom payoff registered under '" + name + "'");
      }
      return Claim::custom(name, it->second);
    }
    throw InvalidParams("claim: unrecognized spec '" + spec + "'");
  };
  const Claim c = build();
  return neg ? c.negated() : c;
}

void register_custom_claim(const std::string& name,
                           std::function<double(const Eigen::VectorXd&)> payoff) {
  if (name.empty()) throw InvalidParams("claim: custom name must not be empty");
  if (!payoff) throw InvalidParams("claim: custom payoff must be callable");
  custom_registry()[name] = std::move(payoff);
}

}  // namespace exphedge

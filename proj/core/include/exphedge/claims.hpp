#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace exphedge {

// Payoff of a European claim as the amount the agent RECEIVES at maturity.
// A claim the agent owes is expressed by negation, e.g. parse_claim("-put:1").
class Claim {
 public:
  enum class Kind { zero, put, call, custom };

  static Claim zero();
  static Claim put(double strike);
  static Claim call(double strike);
  static Claim custom(std::string name,
                      std::function<double(const Eigen::VectorXd&)> payoff);

  Claim negated() const;

  Kind kind() const { return kind_; }
  double strike() const { return strike_; }
  int sign() const { return sign_; }
  bool is_zero() const { return kind_ == Kind::zero; }

  // Round-trips through parse_claim.
  std::string spec_string() const;

  // Payoff at the terminal state. Vanilla kinds read the first asset.
  double payoff(const Eigen::Ref<const Eigen::VectorXd>& terminal_state) const;

 private:
  Claim() = default;
  Kind kind_ = Kind::zero;
  double strike_ = 0.0;
  int sign_ = 1;
  std::string name_;
  std::function<double(const Eigen::VectorXd&)> fn_;
};

double payoff(const Claim& claim,
              const Eigen::Ref<const Eigen::VectorXd>& terminal_state);

// Grammar: "zero" | "put:<strike>" | "call:<strike>" | "custom:<name>",
// optionally prefixed with '-' to flip the sign.
Claim parse_claim(const std::string& spec);

// Makes "custom:<name>" resolvable by parse_claim. Registration is
// process-wide and not thread-safe; do it during startup.
void register_custom_claim(const std::string& name,
                           std::function<double(const Eigen::VectorXd&)> payoff);

}  // namespace exphedge

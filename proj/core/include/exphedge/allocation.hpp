#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "exphedge/basis.hpp"
#include "exphedge/claims.hpp"
#include "exphedge/market.hpp"
#include "exphedge/optimizer.hpp"

namespace exphedge {

// A self-financing trading rule on the step grid. holdings(k, state) is the
// number of shares of each asset held over the k-th step (k = 1..K), decided
// from the price state at the step's left endpoint.
class HedgingStrategy {
 public:
  virtual ~HedgingStrategy() = default;
  virtual Eigen::VectorXd holdings(int step, const Eigen::VectorXd& state) const = 0;
  virtual int n_steps() const = 0;
  virtual int n_assets() const = 0;
};

struct StepDiagnostics {
  int step = 0;
  OptimStatus status = OptimStatus::max_iter;
  int iterations = 0;
  double gradient_norm = 0.0;
  double log_objective = 0.0;
};

// Strategy learned by backward induction. Step 1 sees the degenerate time-0
// state, so it stores plain share holdings; every later step stores dollar
// allocations as basis coefficients in the standardized feature frame.
class StrategyTable final : public HedgingStrategy {
 public:
  struct StepRule {
    Eigen::MatrixXd coeffs;  // d x R, dollars per standardized feature
    FeatureTransform transform;
  };

  StrategyTable(std::string market_tag, int n_steps, BasisSet basis,
                double gamma, Eigen::VectorXd h1, std::vector<StepRule> rules,
                double log_psi1, std::vector<StepDiagnostics> diagnostics,
                std::int64_t n_training_paths, std::uint64_t training_seed);

  Eigen::VectorXd holdings(int step, const Eigen::VectorXd& state) const override;
  int n_steps() const override { return n_steps_; }
  int n_assets() const override { return basis_.n_assets(); }

  const std::string& market_tag() const { return market_tag_; }
  const BasisSet& basis() const { return basis_; }
  double gamma() const { return gamma_; }
  const Eigen::VectorXd& first_step_holdings() const { return h1_; }
  const StepRule& rule(int step) const;  // step in [2, K]
  const std::vector<StepDiagnostics>& diagnostics() const { return diagnostics_; }
  std::int64_t n_training_paths() const { return n_training_paths_; }
  std::uint64_t training_seed() const { return training_seed_; }

  // Sample estimate of the certainty equivalent of optimally hedged terminal
  // wealth: (1/gamma) log Psi_1 at the learned rule. Negative values mean
  // the agent beats the zero-wealth benchmark.
  double certainty_equivalent() const { return log_psi1_ / gamma_; }
  double log_psi1() const { return log_psi1_; }

 private:
  std::string market_tag_;
  int n_steps_;
  BasisSet basis_;
  double gamma_;
  Eigen::VectorXd h1_;
  std::vector<StepRule> rules_;  // rules_[k - 2] governs step k
  double log_psi1_;
  std::vector<StepDiagnostics> diagnostics_;
  std::int64_t n_training_paths_;
  std::uint64_t training_seed_;
};

struct LearnOptions {
  SolverOptions solver;
  // Post-hoc exponential smoothing of the coefficient sequence across time
  // steps (in the raw feature frame): s_2 = c_2, s_k = a s_{k-1} + (1-a) c_k.
  // After smoothing, step 1 is refit so the stored certainty equivalent
  // matches the stored rules. 0 disables it.
  double smoothing = 0.0;
  std::uint64_t training_seed = 0;  // recorded in artifacts, not used here
};

// Backward induction over the step grid: step K is fit first with the claim
// payoff as carry, each earlier step adds the later steps' realized trading
// terms to the carry. The claim payoff is the amount received, so owing a
// claim means learning its negation.
StrategyTable learn(const PathSet& paths, const Claim& claim,
                    const BasisSet& basis, double gamma,
                    const LearnOptions& opts = {});

// Terminal P&L of the strategy on each path: trading gains plus the claim
// amount received. No premium is added or subtracted.
std::vector<double> apply(const HedgingStrategy& strategy, const Claim& claim,
                          const PathSet& paths);

// Text round trip. save writes a self-describing CSV; load reconstructs an
// equivalent table (byte-identical on re-save).
void save_strategy(const StrategyTable& table, std::ostream& os);
StrategyTable load_strategy(std::istream& is);

}  // namespace exphedge

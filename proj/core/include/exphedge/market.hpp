#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace exphedge {

// Constant-coefficient lognormal market: d risky assets with drift mu,
// volatility matrix sigma (d x d, invertible), cash rate r, over [0, T]
// split into K equal steps.
class MarketParams {
 public:
  MarketParams(Eigen::VectorXd mu, Eigen::MatrixXd sigma, double r,
               Eigen::VectorXd s0, double horizon, int n_steps);

  static MarketParams one_asset(double mu, double sigma, double r, double s0,
                                double horizon, int n_steps);

  int n_assets() const { return static_cast<int>(mu_.size()); }
  int n_steps() const { return n_steps_; }
  double rate() const { return r_; }
  double horizon() const { return horizon_; }
  double dt() const { return horizon_ / n_steps_; }
  const Eigen::VectorXd& drift() const { return mu_; }
  const Eigen::MatrixXd& vol() const { return sigma_; }
  const Eigen::VectorXd& spot0() const { return s0_; }
  const Eigen::MatrixXd& covariance() const { return cov_; }

  // sigma^{-1} (mu - r 1), cached at construction.
  const Eigen::VectorXd& lambda() const { return lambda_; }

  // Canonical id string; two params objects describe the same market iff
  // their tags are equal.
  std::string tag() const;

 private:
  Eigen::VectorXd mu_;
  Eigen::MatrixXd sigma_;
  double r_;
  Eigen::VectorXd s0_;
  double horizon_;
  int n_steps_;
  Eigen::MatrixXd cov_;
  Eigen::VectorXd lambda_;
};

struct SimConfig {
  std::int64_t n_paths = 0;
  std::uint64_t seed = 0;
  bool antithetic = false;
};

// Simulated price grid: states[i][k][j] = price of asset j on path i at time
// index k (k = 0 is the common initial state S0, k = K is terminal).
class PathSet {
 public:
  PathSet(int n_paths, int n_steps, int n_assets, std::vector<double> states,
          std::string source_tag = {});

  int n_paths() const { return n_paths_; }
  int n_steps() const { return n_steps_; }
  int n_assets() const { return n_assets_; }

  // Tag of the market that generated these paths; empty for hand-built sets.
  const std::string& source_tag() const { return source_tag_; }

  // Price of asset j at time index k (0..K) on path i.
  double state(int i, int k, int j) const {
    return states_[(static_cast<std::size_t>(i) * (n_steps_ + 1) + k) * n_assets_ + j];
  }
  // Pointer to the d prices at time index k on path i.
  const double* state_row(int i, int k) const {
    return states_.data() +
           (static_cast<std::size_t>(i) * (n_steps_ + 1) + k) * n_assets_;
  }
  // Price increment over the step from time index k to k+1 (0 <= k < K),
  // i.e. the move earned by a position chosen at time index k.
  double increment(int i, int k, int j) const {
    return increments_[(static_cast<std::size_t>(i) * n_steps_ + k) * n_assets_ + j];
  }
  const double* increment_row(int i, int k) const {
    return increments_.data() +
           (static_cast<std::size_t>(i) * n_steps_ + k) * n_assets_;
  }

  const std::vector<double>& raw_states() const { return states_; }

 private:
  int n_paths_;
  int n_steps_;
  int n_assets_;
  std::vector<double> states_;
  std::vector<double> increments_;
  std::string source_tag_;
};

// Exact lognormal stepping: log-price increments are drawn from the step
// distribution itself, so there is no discretization bias at any K.
// Antithetic mode pairs paths (2m, 2m+1) on mirrored normals and requires an
// even path count.
PathSet simulate_gbm(const MarketParams& params, const SimConfig& cfg);

Eigen::VectorXd market_price_of_risk(const MarketParams& params);

// Long format, one row per (path, step, asset), 12 significant digits.
void export_paths_csv(const PathSet& paths, std::ostream& os);

}  // namespace exphedge

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "exphedge/market.hpp"
#include "exphedge/optimizer.hpp"

namespace exphedge {

// Experiment description, parsed from a line-based `key = value` file with
// `#` comments. Unset keys take defaults; resolve() also derives dependent
// defaults (eval_seed = seed + 1, n_eval_paths = n_paths) and validates.
// to_string() emits every key in canonical order, so saving a resolved
// config and re-running it reproduces the run.
struct RunConfig {
  int d = 1;
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
  double r = 0.0;
  Eigen::VectorXd s0;
  double horizon = 1.0;
  int n_steps = 50;

  std::string claim_spec = "put:1";
  std::string basis_descriptor = "poly:2";
  double gamma = 1.0;
  std::vector<double> report_gammas = {0.25, 1.0, 4.0};
  std::vector<double> report_levels = {0.90, 0.99};

  std::int64_t n_paths = 100000;
  std::int64_t n_eval_paths = -1;  // -1: same as n_paths
  std::uint64_t seed = 1;
  std::uint64_t eval_seed = 0;     // 0: seed + 1
  bool has_eval_seed = false;

  bool antithetic = false;
  double smoothing = 0.0;
  bool in_sample = false;
  std::int64_t hedge_path_index = 0;

  SolverOptions solver;
  std::string out_dir = "out";

  static RunConfig defaults();
  static RunConfig from_string(const std::string& text);
  static RunConfig load(const std::filesystem::path& file);

  // Fills derived defaults and validates everything; idempotent.
  void resolve();

  MarketParams market() const;
  std::string to_string() const;
  void save(const std::filesystem::path& file) const;
};

}  // namespace exphedge

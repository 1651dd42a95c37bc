#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "exphedge/config.hpp"

namespace exphedge {

struct RunArtifacts {
  std::filesystem::path out_dir;
  std::filesystem::path report_csv;
  std::vector<std::filesystem::path> pnl_csvs;
  std::filesystem::path hedge_csv;      // empty if no closed-form counterpart
  std::filesystem::path strategy_csv;
  std::filesystem::path prices_csv;
  std::filesystem::path meta_txt;
  std::filesystem::path resolved_config;
};

// Full protocol: simulate training paths, learn the claim-free and claim
// books, replay learned and closed-form strategies on evaluation paths,
// price, and write the artifact set. Partial artifacts are removed if any
// stage fails.
RunArtifacts run_experiment(const RunConfig& cfg);

struct ConvergenceRow {
  std::int64_t n_paths = 0;
  std::uint64_t seed = 0;
  double price = 0.0;
  double abs_error = 0.0;  // against the closed-form oracle price
};

// Repeats simulate+learn+price per (n, seed) over seeds seed, seed+1, ...,
// seed + n_seeds - 1. The config's claim must not be zero.
std::vector<ConvergenceRow> convergence_study(
    const RunConfig& cfg, const std::vector<std::int64_t>& n_list,
    int n_seeds);

void write_convergence_csv(const std::vector<ConvergenceRow>& rows,
                           std::ostream& os);

}  // namespace exphedge

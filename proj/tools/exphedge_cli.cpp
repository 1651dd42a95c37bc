// Batch driver: simulate -> learn -> replay -> price -> report, from a
// key = value config file. Exit codes: 0 ok, 2 config error, 3 numerical
// failure, 4 I/O failure.

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "exphedge/allocation.hpp"
#include "exphedge/claims.hpp"
#include "exphedge/config.hpp"
#include "exphedge/errors.hpp"
#include "exphedge/experiment.hpp"
#include "exphedge/market.hpp"
#include "exphedge/pricing.hpp"

namespace fs = std::filesystem;
using namespace exphedge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

RunConfig load_resolved(const std::string& file) {
  RunConfig cfg = RunConfig::load(file);
  cfg.resolve();
  return cfg;
}

int cmd_run(const std::string& config_file) {
  RunConfig cfg = load_resolved(config_file);
  const RunArtifacts art = run_experiment(cfg);
  std::printf("wrote %s\n", art.report_csv.string().c_str());
  for (const auto& p : art.pnl_csvs) std::printf("wrote %s\n", p.string().c_str());
  if (!art.hedge_csv.empty()) std::printf("wrote %s\n", art.hedge_csv.string().c_str());
  std::printf("wrote %s\n", art.strategy_csv.string().c_str());
  std::printf("wrote %s\n", art.prices_csv.string().c_str());
  std::printf("wrote %s\n", art.resolved_config.string().c_str());
  std::printf("wrote %s\n", art.meta_txt.string().c_str());
  return kExitOk;
}

int cmd_price(const std::string& config_file) {
  RunConfig cfg = load_resolved(config_file);
  const MarketParams market = cfg.market();
  const Claim claim = parse_claim(cfg.claim_spec);
  const BasisSet basis = BasisSet::parse(cfg.basis_descriptor, market.spot0());

  SimConfig sim{cfg.n_paths, cfg.seed, cfg.antithetic};
  const PathSet paths = simulate_gbm(market, sim);

  LearnOptions lopts;
  lopts.solver = cfg.solver;
  lopts.smoothing = cfg.smoothing;
  lopts.training_seed = cfg.seed;

  const StrategyTable merton = learn(paths, Claim::zero(), basis, cfg.gamma, lopts);
  std::printf("ce_merton_learned = %.6f\n", merton.certainty_equivalent());
  std::printf("ce_merton_analytic = %.6f\n",
              analytic_merton_ce(market, cfg.gamma).value);

  if (claim.is_zero()) {
    std::printf("claim = zero, no price\n");
    return kExitOk;
  }

  const PriceSide side =
      (claim.sign() < 0) ? PriceSide::seller : PriceSide::buyer;
  const StrategyTable with_claim = learn(paths, claim, basis, cfg.gamma, lopts);
  std::printf("ce_claim_learned = %.6f\n", with_claim.certainty_equivalent());

  const double learned = indifference_price(certainty_equivalent(with_claim),
                                            certainty_equivalent(merton), side);
  std::printf("side = %s\n", to_string(side));
  std::printf("indifference_price_learned = %.6f\n", learned);
  if (claim.kind() != Claim::Kind::custom) {
    const double analytic = indifference_price(
        analytic_claim_ce(market, cfg.gamma, claim),
        analytic_merton_ce(market, cfg.gamma), side);
    std::printf("indifference_price_analytic = %.6f\n", analytic);
  }
  return kExitOk;
}

int cmd_simulate(const std::string& config_file) {
  RunConfig cfg = load_resolved(config_file);
  const MarketParams market = cfg.market();
  SimConfig sim{cfg.n_paths, cfg.seed, cfg.antithetic};
  const PathSet paths = simulate_gbm(market, sim);

  const fs::path out_dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("simulate: cannot create " + out_dir.string());
  const fs::path out = out_dir / "paths.csv";
  std::ofstream os(out);
  if (!os) throw IoError("simulate: cannot write " + out.string());
  export_paths_csv(paths, os);
  os.close();
  if (os.fail()) throw IoError("simulate: write failed for " + out.string());

  std::printf("wrote %s (%" PRId64 " paths, %d steps, %d assets)\n",
              out.string().c_str(), paths.n_paths(), paths.n_steps(),
              paths.n_assets());
  return kExitOk;
}

int cmd_converge(const std::string& config_file,
                 const std::vector<std::int64_t>& n_list, int n_seeds,
                 std::string out_file) {
  RunConfig cfg = load_resolved(config_file);
  const auto rows = convergence_study(cfg, n_list, n_seeds);

  if (out_file.empty()) out_file = (fs::path(cfg.out_dir) / "converge.csv").string();
  const fs::path out(out_file);
  if (out.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(out.parent_path(), ec);
    if (ec) throw IoError("converge: cannot create " + out.parent_path().string());
  }
  std::ofstream os(out);
  if (!os) throw IoError("converge: cannot write " + out.string());
  write_convergence_csv(rows, os);
  os.close();
  if (os.fail()) throw IoError("converge: write failed for " + out.string());

  for (std::int64_t n : n_list) {
    std::vector<double> errs;
    for (const auto& r : rows)
      if (r.n_paths == n) errs.push_back(r.abs_error);
    std::sort(errs.begin(), errs.end());
    const double median = errs.empty() ? 0.0
                          : (errs.size() % 2 ? errs[errs.size() / 2]
                                             : 0.5 * (errs[errs.size() / 2 - 1] +
                                                      errs[errs.size() / 2]));
    std::printf("n = %" PRId64 ": median abs error = %.6f over %zu seeds\n", n,
                median, errs.size());
  }
  std::printf("wrote %s\n", out.string().c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal hedging under exponential utility: simulate, learn, price, report"};
  app.require_subcommand(1);

  std::string run_config, price_config, sim_config, conv_config;
  std::vector<std::int64_t> n_list = {1000, 10000, 100000};
  int n_seeds = 5;
  std::string conv_out;

  auto* run = app.add_subcommand("run", "Run the full experiment and write artifacts");
  run->add_option("config", run_config, "Config file")->required();

  auto* price = app.add_subcommand("price", "Learn and print indifference prices");
  price->add_option("config", price_config, "Config file")->required();

  auto* sim = app.add_subcommand("simulate", "Simulate paths and write paths.csv");
  sim->add_option("config", sim_config, "Config file")->required();

  auto* conv = app.add_subcommand("converge", "Price error vs sample count study");
  conv->add_option("config", conv_config, "Config file")->required();
  conv->add_option("--n-list", n_list, "Sample counts to sweep")->delimiter(',');
  conv->add_option("--seeds", n_seeds, "Seeds per sample count");
  conv->add_option("--out", conv_out, "Output CSV (default <out_dir>/converge.csv)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_config);
    if (price->parsed()) return cmd_price(price_config);
    if (sim->parsed()) return cmd_simulate(sim_config);
    if (conv->parsed()) return cmd_converge(conv_config, n_list, n_seeds, conv_out);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitIo;
  } catch (const InvalidParams& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const DimensionMismatch& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const Error& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  }
  return kExitOk;
}

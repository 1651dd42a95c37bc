#include "exphedge/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include "exphedge/allocation.hpp"
#include "exphedge/analytic.hpp"
#include "exphedge/claims.hpp"
#include "exphedge/errors.hpp"
#include "exphedge/pricing.hpp"
#include "exphedge/risk.hpp"
#include "exphedge/rng.hpp"

namespace exphedge {

namespace {

namespace fs = std::filesystem;

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct CaseResult {
  std::string name;
  std::vector<double> pnl;
  RiskReport risk;
};

void write_report_csv(const std::vector<CaseResult>& cases,
                      const RunConfig& cfg, std::ostream& os) {
  os << "case,mean,std";
  for (std::size_t i = 0; i < cfg.report_gammas.size(); ++i) {
    os << ",u" << (i + 1);
  }
  // Levels in descending order, matching the report.
  std::vector<double> levels = cfg.report_levels;
  std::sort(levels.begin(), levels.end(), std::greater<>());
  auto level_label = [](double c) {
    // 0.99 -> "99", 0.9 -> "90"
    const int pct = static_cast<int>(std::lround(c * 100.0));
    return std::to_string(pct);
  };
  for (double c : levels) os << ",var" << level_label(c);
  for (double c : levels) os << ",cvar" << level_label(c);
  os << "\n";
  for (const CaseResult& cr : cases) {
    os << cr.name << ',' << fmt17(cr.risk.mean) << ',' << fmt17(cr.risk.std);
    for (const auto& [g, u] : cr.risk.utilities) os << ',' << fmt17(u);
    for (double v : cr.risk.var) os << ',' << fmt17(v);
    for (double v : cr.risk.cvar) os << ',' << fmt17(v);
    os << "\n";
  }
}

void write_pnl_csv(const std::vector<double>& pnl, std::ostream& os) {
  os << "pnl\n";
  for (double x : pnl) os << fmt17(x) << "\n";
}

class OutputFile {
 public:
  OutputFile(const fs::path& path, std::vector<fs::path>& written)
      : os_(path), path_(path) {
    if (!os_) throw IoError("run: cannot write " + path.string());
    written.push_back(path);
  }
  std::ostream& stream() { return os_; }
  void close() {
    os_.close();
    if (os_.fail()) throw IoError("run: write failed for " + path_.string());
  }

 private:
  std::ofstream os_;
  fs::path path_;
};

}  // namespace

RunArtifacts run_experiment(const RunConfig& cfg_in) {
  const auto t0 = std::chrono::steady_clock::now();

  RunConfig cfg = cfg_in;
  cfg.resolve();
  const MarketParams market = cfg.market();
  const Claim claim = parse_claim(cfg.claim_spec);
  const BasisSet basis = BasisSet::parse(cfg.basis_descriptor, market.spot0());
  const bool has_claim = !claim.is_zero();
  const PriceSide side =
      (claim.sign() < 0) ? PriceSide::seller : PriceSide::buyer;
  // The claim actually changing hands: what the buyer receives.
  const Claim traded =
      (side == PriceSide::seller) ? claim.negated() : claim;
  const bool closed_form_claim = claim.kind() != Claim::Kind::custom;

  const fs::path out_dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("run: cannot create " + out_dir.string());

  RunArtifacts artifacts;
  artifacts.out_dir = out_dir;
  std::vector<fs::path> written;

  try {
    // Stage: simulate.
    SimConfig train_cfg{cfg.n_paths, cfg.seed, cfg.antithetic};
    const PathSet train_paths = simulate_gbm(market, train_cfg);
    std::optional<PathSet> eval_storage;
    if (!cfg.in_sample) {
      SimConfig eval_cfg{cfg.n_eval_paths, cfg.eval_seed, cfg.antithetic};
      eval_storage.emplace(simulate_gbm(market, eval_cfg));
    }
    const PathSet& eval_paths = cfg.in_sample ? train_paths : *eval_storage;

    // Stage: learn.
    LearnOptions lopts;
    lopts.solver = cfg.solver;
    lopts.smoothing = cfg.smoothing;
    lopts.training_seed = cfg.seed;
    const StrategyTable learned_merton =
        learn(train_paths, Claim::zero(), basis, cfg.gamma, lopts);
    std::optional<StrategyTable> learned_claim;
    if (has_claim) {
      learned_claim.emplace(learn(train_paths, claim, basis, cfg.gamma, lopts));
    }

    // Stage: replay.
    const TheoreticalStrategy true_merton(market, cfg.gamma, Claim::zero());
    std::optional<TheoreticalStrategy> true_claim;
    if (has_claim && closed_form_claim) {
      true_claim.emplace(market, cfg.gamma, claim);
    }

    std::vector<CaseResult> cases;
    auto add_case = [&](const std::string& name, const HedgingStrategy& strat,
                        const Claim& case_claim) {
      CaseResult cr;
      cr.name = name;
      cr.pnl = apply(strat, case_claim, eval_paths);
      cr.risk = report(cr.pnl, cfg.report_gammas, cfg.report_levels);
      cases.push_back(std::move(cr));
    };
    add_case("learned_merton", learned_merton, Claim::zero());
    if (has_claim) add_case("learned_claim", *learned_claim, claim);
    add_case("true_merton", true_merton, Claim::zero());
    if (true_claim) add_case("true_claim", *true_claim, claim);

    // Stage: price.
    const CertaintyEquivalent ce_merton_learned =
        certainty_equivalent(learned_merton);
    std::optional<CertaintyEquivalent> ce_claim_learned;
    std::optional<double> price_learned;
    if (has_claim) {
      ce_claim_learned = certainty_equivalent(*learned_claim);
      price_learned =
          indifference_price(*ce_claim_learned, ce_merton_learned, side);
    }
    const CertaintyEquivalent ce_merton_analytic =
        analytic_merton_ce(market, cfg.gamma);
    std::optional<CertaintyEquivalent> ce_claim_analytic;
    std::optional<double> price_analytic;
    std::optional<double> oracle_price;
    if (has_claim && closed_form_claim) {
      ce_claim_analytic = analytic_claim_ce(market, cfg.gamma, claim);
      price_analytic =
          indifference_price(*ce_claim_analytic, ce_merton_analytic, side);
      oracle_price = davis_price_complete(market, traded);
    }

    // Prices derived from reported expected utilities at gamma = 1, the
    // report's second column in the default configuration.
    std::optional<double> price_u_learned;
    std::optional<double> price_u_true;
    const bool have_unit_gamma =
        std::find(cfg.report_gammas.begin(), cfg.report_gammas.end(), 1.0) !=
        cfg.report_gammas.end();
    if (has_claim && have_unit_gamma) {
      auto find_case = [&](const std::string& name) -> const CaseResult* {
        for (const CaseResult& cr : cases) {
          if (cr.name == name) return &cr;
        }
        return nullptr;
      };
      const CaseResult* lm = find_case("learned_merton");
      const CaseResult* lc = find_case("learned_claim");
      if (lm && lc) {
        double p = price_from_expected_utilities(lm->risk.utility_at(1.0),
                                                 lc->risk.utility_at(1.0), 1.0);
        price_u_learned = (side == PriceSide::seller) ? -p : p;
      }
      const CaseResult* tm = find_case("true_merton");
      const CaseResult* tc = find_case("true_claim");
      if (tm && tc) {
        double p = price_from_expected_utilities(tm->risk.utility_at(1.0),
                                                 tc->risk.utility_at(1.0), 1.0);
        price_u_true = (side == PriceSide::seller) ? -p : p;
      }
    }

    // Stage: write artifacts.
    artifacts.report_csv = out_dir / "report.csv";
    {
      OutputFile f(artifacts.report_csv, written);
      write_report_csv(cases, cfg, f.stream());
      f.close();
    }
    for (const CaseResult& cr : cases) {
      const fs::path p = out_dir / ("pnl_" + cr.name + ".csv");
      OutputFile f(p, written);
      write_pnl_csv(cr.pnl, f.stream());
      f.close();
      artifacts.pnl_csvs.push_back(p);
    }

    // Hedge trajectory along one evaluation path, learned vs closed form.
    if (!has_claim || closed_form_claim) {
      const HedgingStrategy& learned_side =
          has_claim ? static_cast<const HedgingStrategy&>(*learned_claim)
                    : learned_merton;
      const HedgingStrategy& true_side =
          true_claim ? static_cast<const HedgingStrategy&>(*true_claim)
                     : true_merton;
      const int path = static_cast<int>(cfg.hedge_path_index);
      artifacts.hedge_csv = out_dir / "hedge_path.csv";
      OutputFile f(artifacts.hedge_csv, written);
      f.stream() << "step,asset,learned,theoretical\n";
      Eigen::VectorXd state(market.n_assets());
      for (int k = 1; k <= market.n_steps(); ++k) {
        for (int j = 0; j < market.n_assets(); ++j) {
          state[j] = eval_paths.state(path, k - 1, j);
        }
        const Eigen::VectorXd h_learned = learned_side.holdings(k, state);
        const Eigen::VectorXd h_true = true_side.holdings(k, state);
        for (int j = 0; j < market.n_assets(); ++j) {
          f.stream() << k << ',' << j << ',' << fmt17(h_learned[j]) << ','
                     << fmt17(h_true[j]) << "\n";
        }
      }
      f.close();
    }

    artifacts.strategy_csv = out_dir / "strategy.csv";
    {
      OutputFile f(artifacts.strategy_csv, written);
      save_strategy(has_claim ? *learned_claim : learned_merton, f.stream());
      f.close();
    }

    artifacts.prices_csv = out_dir / "prices.csv";
    {
      OutputFile f(artifacts.prices_csv, written);
      auto& os = f.stream();
      os << "name,value\n";
      os << "ce_merton_learned," << fmt17(ce_merton_learned.value) << "\n";
      os << "ce_merton_analytic," << fmt17(ce_merton_analytic.value) << "\n";
      if (ce_claim_learned) {
        os << "ce_claim_learned," << fmt17(ce_claim_learned->value) << "\n";
      }
      if (ce_claim_analytic) {
        os << "ce_claim_analytic," << fmt17(ce_claim_analytic->value) << "\n";
      }
      if (price_learned) {
        os << "indifference_price_learned," << fmt17(*price_learned) << "\n";
      }
      if (price_analytic) {
        os << "indifference_price_analytic," << fmt17(*price_analytic) << "\n";
      }
      if (price_u_learned) {
        os << "price_from_u_learned," << fmt17(*price_u_learned) << "\n";
      }
      if (price_u_true) {
        os << "price_from_u_true," << fmt17(*price_u_true) << "\n";
      }
      if (oracle_price) {
        os << "bs_oracle_price," << fmt17(*oracle_price) << "\n";
      }
      f.close();
    }

    artifacts.resolved_config = out_dir / "config_resolved.cfg";
    {
      OutputFile f(artifacts.resolved_config, written);
      f.stream() << cfg.to_string();
      f.close();
    }

    const auto t1 = std::chrono::steady_clock::now();
    const auto wall_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();

    artifacts.meta_txt = out_dir / "meta.txt";
    {
      OutputFile f(artifacts.meta_txt, written);
      auto& os = f.stream();
      os << "rng = " << rng_algorithm_name() << "\n";
      os << "seed = " << cfg.seed << "\n";
      os << "eval_seed = " << cfg.eval_seed << "\n";
      os << "n_paths = " << cfg.n_paths << "\n";
      os << "n_eval_paths = " << cfg.n_eval_paths << "\n";
      os << "basis = " << cfg.basis_descriptor << "\n";
      os << "claim = " << cfg.claim_spec << "\n";
      os << "side = " << to_string(side) << "\n";
      os << "gamma = " << fmt17(cfg.gamma) << "\n";
      os << "evaluation = " << (cfg.in_sample ? "in_sample" : "out_of_sample")
         << "\n";
      os << "tol_g = " << fmt17(cfg.solver.tol_g) << "\n";
      os << "tol_x = " << fmt17(cfg.solver.tol_x) << "\n";
      os << "max_iter = " << cfg.solver.max_iter << "\n";
      os << "coeff_cap = " << fmt17(cfg.solver.coeff_cap) << "\n";
      os << "ridge = " << fmt17(cfg.solver.ridge) << "\n";
      os << "quantile_convention = lower order statistic at rank "
            "ceil((1-c)*n), no interpolation\n";
      os << "pnl_convention = trading gains plus claim payoff received; no "
            "premium included\n";
      os << "wall_ms = " << wall_ms << "\n";
      f.close();
    }
  } catch (...) {
    for (const fs::path& p : written) {
      std::error_code rm_ec;
      fs::remove(p, rm_ec);
    }
    throw;
  }

  return artifacts;
}

std::vector<ConvergenceRow> convergence_study(
    const RunConfig& cfg_in, const std::vector<std::int64_t>& n_list,
    int n_seeds) {
  RunConfig cfg = cfg_in;
  cfg.resolve();
  if (n_list.empty()) throw InvalidParams("converge: n_list must not be empty");
  if (n_seeds < 1) throw InvalidParams("converge: need at least one seed");
  const Claim claim = parse_claim(cfg.claim_spec);
  if (claim.is_zero()) {
    throw ConfigError("converge: the config claim must not be zero");
  }
  if (claim.kind() == Claim::Kind::custom) {
    throw ConfigError("converge: custom claims have no oracle price");
  }
  const MarketParams market = cfg.market();
  const BasisSet basis = BasisSet::parse(cfg.basis_descriptor, market.spot0());
  const PriceSide side =
      (claim.sign() < 0) ? PriceSide::seller : PriceSide::buyer;
  const Claim traded = (side == PriceSide::seller) ? claim.negated() : claim;
  const double oracle = davis_price_complete(market, traded);

  std::vector<ConvergenceRow> rows;
  rows.reserve(n_list.size() * static_cast<std::size_t>(n_seeds));
  for (int s = 0; s < n_seeds; ++s) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(s);
    for (std::int64_t n : n_list) {
      if (n < 2) throw InvalidParams("converge: path counts must be >= 2");
      SimConfig sim{n, seed, cfg.antithetic};
      const PathSet paths = simulate_gbm(market, sim);
      LearnOptions lopts;
      lopts.solver = cfg.solver;
      lopts.smoothing = cfg.smoothing;
      lopts.training_seed = seed;
      const StrategyTable merton =
          learn(paths, Claim::zero(), basis, cfg.gamma, lopts);
      const StrategyTable hedged = learn(paths, claim, basis, cfg.gamma, lopts);
      const double price = indifference_price(certainty_equivalent(hedged),
                                              certainty_equivalent(merton), side);
      rows.push_back({n, seed, price, std::fabs(price - oracle)});
    }
  }
  return rows;
}

void write_convergence_csv(const std::vector<ConvergenceRow>& rows,
                           std::ostream& os) {
  os << "n_paths,seed,price,abs_error\n";
  for (const ConvergenceRow& row : rows) {
    os << row.n_paths << ',' << row.seed << ',' << fmt17(row.price) << ','
       << fmt17(row.abs_error) << "\n";
  }
  if (!os) throw IoError("converge: write failed");
}

}  // namespace exphedge

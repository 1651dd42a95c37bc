#include "exphedge/allocation.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <utility>

#include "exphedge/errors.hpp"
#include "exphedge/parallel.hpp"

namespace exphedge {

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Raw features at the given time index, one row per path.
void fill_features(const BasisSet& basis, const PathSet& paths, int time_index,
                   std::vector<double>& out) {
  const int R = basis.size();
  out.resize(static_cast<std::size_t>(paths.n_paths()) * R);
  for_blocks(static_cast<std::size_t>(paths.n_paths()), kDefaultBlock,
             [&](std::size_t begin, std::size_t end) {
               for (std::size_t i = begin; i < end; ++i) {
                 basis.evaluate(paths.state_row(static_cast<int>(i), time_index),
                                out.data() + i * R);
               }
             });
}

// Per-asset simple returns over step k (1-based): increment / left price.
// Coefficients against these are dollar allocations.
void fill_returns(const PathSet& paths, int step, std::vector<double>& out) {
  const int d = paths.n_assets();
  out.resize(static_cast<std::size_t>(paths.n_paths()) * d);
  for_blocks(static_cast<std::size_t>(paths.n_paths()), kDefaultBlock,
             [&](std::size_t begin, std::size_t end) {
               for (std::size_t i = begin; i < end; ++i) {
                 const double* inc = paths.increment_row(static_cast<int>(i), step - 1);
                 const double* st = paths.state_row(static_cast<int>(i), step - 1);
                 double* row = out.data() + i * d;
                 for (int j = 0; j < d; ++j) row[j] = inc[j] / st[j];
               }
             });
}

// Dollar allocation of a rule at one path's standardized feature row.
double trading_term(const Eigen::MatrixXd& coeffs, const double* feat,
                    const double* returns, int d, int R) {
  double total = 0.0;
  for (int j = 0; j < d; ++j) {
    double dollars = 0.0;
    for (int r = 0; r < R; ++r) dollars += coeffs(j, r) * feat[r];
    total += dollars * returns[j];
  }
  return total;
}

StrategyTable::StepRule to_raw_frame(const StrategyTable::StepRule& rule) {
  const int d = static_cast<int>(rule.coeffs.rows());
  const int R = static_cast<int>(rule.coeffs.cols());
  StrategyTable::StepRule raw;
  raw.coeffs = Eigen::MatrixXd::Zero(d, R);
  raw.transform = FeatureTransform::identity(R);
  for (int j = 0; j < d; ++j) {
    double constant = rule.coeffs(j, 0);
    for (int r = 1; r < R; ++r) {
      const double cr = rule.coeffs(j, r) / rule.transform.scale[r];
      raw.coeffs(j, r) = cr;
      constant -= cr * rule.transform.mean[r];
    }
    raw.coeffs(j, 0) = constant;
  }
  return raw;
}

}  // namespace

StrategyTable::StrategyTable(std::string market_tag, int n_steps, BasisSet basis,
                             double gamma, Eigen::VectorXd h1,
                             std::vector<StepRule> rules, double log_psi1,
                             std::vector<StepDiagnostics> diagnostics,
                             std::int64_t n_training_paths,
                             std::uint64_t training_seed)
    : market_tag_(std::move(market_tag)),
      n_steps_(n_steps),
      basis_(std::move(basis)),
      gamma_(gamma),
      h1_(std::move(h1)),
      rules_(std::move(rules)),
      log_psi1_(log_psi1),
      diagnostics_(std::move(diagnostics)),
      n_training_paths_(n_training_paths),
      training_seed_(training_seed) {
  if (n_steps_ < 1) throw InvalidParams("strategy: need at least one step");
  if (!(gamma_ > 0.0) || !std::isfinite(gamma_)) {
    throw InvalidParams("strategy: gamma must be positive");
  }
  const int d = basis_.n_assets();
  const int R = basis_.size();
  if (h1_.size() != d || !h1_.allFinite()) {
    throw InvalidParams("strategy: step-1 holdings must be d finite values");
  }
  if (static_cast<int>(rules_.size()) != n_steps_ - 1) {
    throw DimensionMismatch("strategy: need one rule per step beyond the first");
  }
  for (const StepRule& rule : rules_) {
    if (rule.coeffs.rows() != d || rule.coeffs.cols() != R ||
        !rule.coeffs.allFinite()) {
      throw DimensionMismatch("strategy: rule coefficients must be d x R finite");
    }
    if (rule.transform.mean.size() != R || rule.transform.scale.size() != R ||
        (rule.transform.scale.array() <= 0.0).any()) {
      throw InvalidParams("strategy: malformed feature transform");
    }
  }
  if (static_cast<int>(diagnostics_.size()) != n_steps_) {
    throw DimensionMismatch("strategy: need one diagnostic entry per step");
  }
  for (const StepDiagnostics& dg : diagnostics_) {
    if (dg.status != OptimStatus::converged &&
        dg.status != OptimStatus::regularized) {
      throw InvalidParams("strategy: stored steps must have converged");
    }
  }
  if (!std::isfinite(log_psi1_)) {
    throw InvalidParams("strategy: log objective must be finite");
  }
}

const StrategyTable::StepRule& StrategyTable::rule(int step) const {
  if (step < 2 || step > n_steps_) {
    throw InvalidParams("strategy: rules exist for steps 2..K");
  }
  return rules_[step - 2];
}

Eigen::VectorXd StrategyTable::holdings(int step,
                                        const Eigen::VectorXd& state) const {
  if (step < 1 || step > n_steps_) {
    throw InvalidParams("strategy: step out of range");
  }
  if (state.size() != basis_.n_assets()) {
    throw DimensionMismatch("strategy: state has wrong number of assets");
  }
  if (step == 1) return h1_;
  const StepRule& r = rules_[step - 2];
  Eigen::VectorXd f = basis_.evaluate(state);
  r.transform.apply(f.data());
  Eigen::VectorXd dollars = r.coeffs * f;
  return dollars.cwiseQuotient(state);
}

StrategyTable learn(const PathSet& paths, const Claim& claim,
                    const BasisSet& basis, double gamma,
                    const LearnOptions& opts) {
  const int N = paths.n_paths();
  const int K = paths.n_steps();
  const int d = paths.n_assets();
  if (basis.n_assets() != d) {
    throw DimensionMismatch("learn: basis and paths disagree on asset count");
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw InvalidParams("learn: gamma must be positive and finite");
  }
  if (N < 2) throw DegenerateData("learn: need at least two paths");
  if (!(opts.smoothing >= 0.0 && opts.smoothing < 1.0)) {
    throw InvalidParams("learn: smoothing must lie in [0, 1)");
  }
  // Step 1 holdings are plain shares of the common initial state.
  const double* s0 = paths.state_row(0, 0);
  for (int i = 1; i < N; ++i) {
    const double* si = paths.state_row(i, 0);
    for (int j = 0; j < d; ++j) {
      if (si[j] != s0[j]) {
        throw DegenerateData("learn: paths must share the initial state");
      }
    }
  }

  const int R = basis.size();

  // Carry starts from the claim: owing cash raises the exponent.
  std::vector<double> carry(N);
  for_blocks(static_cast<std::size_t>(N), kDefaultBlock,
             [&](std::size_t begin, std::size_t end) {
               Eigen::VectorXd terminal(d);
               for (std::size_t i = begin; i < end; ++i) {
                 const double* row = paths.state_row(static_cast<int>(i), K);
                 for (int j = 0; j < d; ++j) terminal[j] = row[j];
                 carry[i] = -gamma * claim.payoff(terminal);
               }
             });

  std::vector<StrategyTable::StepRule> rules(K >= 2 ? K - 1 : 0);
  std::vector<StepDiagnostics> diag(K);

  ObjectiveData data;
  data.n_paths = N;
  data.n_features = R;
  data.n_assets = d;
  data.gamma = gamma;

  auto check_status = [](const OptimResult& res, int step) {
    if (res.status == OptimStatus::unbounded) {
      throw UnboundedStep(step, "learn: step " + std::to_string(step) +
                                    " has a one-sided in-sample objective; "
                                    "increase n_paths");
    }
    if (res.status == OptimStatus::max_iter) {
      throw ConvergenceFailure("learn: step " + std::to_string(step) +
                               " stopped at the iteration limit");
    }
  };

  auto update_carry = [&](const Eigen::MatrixXd& coeffs,
                          const std::vector<double>& feats,
                          const std::vector<double>& rets, int n_feat) {
    for_blocks(static_cast<std::size_t>(N), kDefaultBlock,
               [&](std::size_t begin, std::size_t end) {
                 for (std::size_t i = begin; i < end; ++i) {
                   carry[i] -= gamma * trading_term(coeffs,
                                                    feats.data() + i * n_feat,
                                                    rets.data() + i * d, d,
                                                    n_feat);
                 }
               });
  };

  std::vector<double> returns;
  Eigen::MatrixXd warm;
  bool have_warm = false;

  for (int k = K; k >= 2; --k) {
    fill_features(basis, paths, k - 1, data.features);
    FeatureTransform transform =
        fit_feature_transform(data.features.data(), N, R);
    for_blocks(static_cast<std::size_t>(N), kDefaultBlock,
               [&](std::size_t begin, std::size_t end) {
                 for (std::size_t i = begin; i < end; ++i) {
                   transform.apply(data.features.data() + i * R);
                 }
               });
    fill_returns(paths, k, returns);
    data.increments = returns;
    data.carry = carry;

    OptimResult res = minimize(data, opts.solver, have_warm ? &warm : nullptr);
    check_status(res, k);
    rules[k - 2] = {res.coefficients, transform};
    warm = res.coefficients;
    have_warm = true;
    diag[k - 1] = {k, res.status, res.iterations, res.gradient_norm,
                   res.log_objective};
    update_carry(res.coefficients, data.features, returns, R);
  }

  if (opts.smoothing > 0.0 && K >= 2) {
    // Exponentially smooth the coefficient sequence across steps in the raw
    // feature frame, then rebuild the carry so step 1 and the stored
    // certainty equivalent refer to the smoothed rules.
    std::vector<StrategyTable::StepRule> smooth(rules.size());
    Eigen::MatrixXd running;
    for (int k = 2; k <= K; ++k) {
      StrategyTable::StepRule raw = to_raw_frame(rules[k - 2]);
      running = (k == 2) ? raw.coeffs
                         : (opts.smoothing * running +
                            (1.0 - opts.smoothing) * raw.coeffs).eval();
      raw.coeffs = running;
      smooth[k - 2] = std::move(raw);
      // The stored rule is no longer the per-step optimum.
      diag[k - 1].status = OptimStatus::regularized;
    }
    rules = std::move(smooth);

    for_blocks(static_cast<std::size_t>(N), kDefaultBlock,
               [&](std::size_t begin, std::size_t end) {
                 Eigen::VectorXd terminal(d);
                 for (std::size_t i = begin; i < end; ++i) {
                   const double* row = paths.state_row(static_cast<int>(i), K);
                   for (int j = 0; j < d; ++j) terminal[j] = row[j];
                   carry[i] = -gamma * claim.payoff(terminal);
                 }
               });
    for (int k = K; k >= 2; --k) {
      fill_features(basis, paths, k - 1, data.features);
      fill_returns(paths, k, returns);
      update_carry(rules[k - 2].coeffs, data.features, returns, R);
    }
  }

  // Step 1: the initial state is the same on every path, so only the
  // constant feature carries information.
  ObjectiveData first;
  first.n_paths = N;
  first.n_features = 1;
  first.n_assets = d;
  first.gamma = gamma;
  first.features.assign(static_cast<std::size_t>(N), 1.0);
  fill_returns(paths, 1, returns);
  first.increments = returns;
  first.carry = carry;

  Eigen::MatrixXd warm1;
  const Eigen::MatrixXd* warm1_ptr = nullptr;
  if (K >= 2) {
    warm1 = rules[0].coeffs.col(0);
    warm1_ptr = &warm1;
  }
  OptimResult res1 = minimize(first, opts.solver, warm1_ptr);
  check_status(res1, 1);
  diag[0] = {1, res1.status, res1.iterations, res1.gradient_norm,
             res1.log_objective};

  Eigen::VectorXd h1(d);
  for (int j = 0; j < d; ++j) h1[j] = res1.coefficients(j, 0) / s0[j];

  return StrategyTable(paths.source_tag(), K, basis, gamma, std::move(h1),
                       std::move(rules), res1.log_objective, std::move(diag),
                       N, opts.training_seed);
}

std::vector<double> apply(const HedgingStrategy& strategy, const Claim& claim,
                          const PathSet& paths) {
  if (strategy.n_assets() != paths.n_assets()) {
    throw DimensionMismatch("apply: strategy and paths disagree on asset count");
  }
  if (strategy.n_steps() != paths.n_steps()) {
    throw DimensionMismatch("apply: strategy and paths disagree on step count");
  }
  const int N = paths.n_paths();
  const int K = paths.n_steps();
  const int d = paths.n_assets();
  std::vector<double> pnl(N);
  for_blocks(static_cast<std::size_t>(N), kDefaultBlock,
             [&](std::size_t begin, std::size_t end) {
               Eigen::VectorXd state(d);
               for (std::size_t i = begin; i < end; ++i) {
                 double acc = 0.0;
                 for (int k = 1; k <= K; ++k) {
                   const double* row = paths.state_row(static_cast<int>(i), k - 1);
                   for (int j = 0; j < d; ++j) state[j] = row[j];
                   const Eigen::VectorXd h = strategy.holdings(k, state);
                   const double* inc =
                       paths.increment_row(static_cast<int>(i), k - 1);
                   for (int j = 0; j < d; ++j) acc += h[j] * inc[j];
                 }
                 const double* row = paths.state_row(static_cast<int>(i), K);
                 for (int j = 0; j < d; ++j) state[j] = row[j];
                 pnl[i] = acc + claim.payoff(state);
               }
             });
  return pnl;
}

namespace {

const char* status_name(OptimStatus s) { return to_string(s); }

OptimStatus status_from_name(const std::string& name) {
  if (name == "converged") return OptimStatus::converged;
  if (name == "regularized") return OptimStatus::regularized;
  if (name == "max_iter") return OptimStatus::max_iter;
  if (name == "unbounded") return OptimStatus::unbounded;
  throw IoError("strategy: unknown solver status '" + name + "'");
}

void write_vector(std::ostream& os, const Eigen::VectorXd& v) {
  for (Eigen::Index r = 0; r < v.size(); ++r) {
    if (r) os << ',';
    os << fmt17(v[r]);
  }
}

Eigen::VectorXd parse_vector(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      values.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw IoError("strategy: bad number '" + item + "'");
    }
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = values[i];
  return v;
}

// "key=value" fields on one metadata line.
std::map<std::string, std::string> parse_fields(const std::string& line) {
  std::map<std::string, std::string> out;
  std::stringstream ss(line);
  std::string token;
  while (ss >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) continue;
    out[token.substr(0, eq)] = token.substr(eq + 1);
  }
  return out;
}

}  // namespace

void save_strategy(const StrategyTable& table, std::ostream& os) {
  const int d = table.n_assets();
  const int R = table.basis().size();
  os << "# strategy v1\n";
  os << "# market = " << table.market_tag() << "\n";
  os << "# steps = " << table.n_steps() << "\n";
  os << "# assets = " << d << "\n";
  os << "# basis = " << table.basis().descriptor() << "\n";
  os << "# s0 = ";
  write_vector(os, table.basis().spot0());
  os << "\n";
  os << "# gamma = " << fmt17(table.gamma()) << "\n";
  os << "# log_psi1 = " << fmt17(table.log_psi1()) << "\n";
  os << "# training_paths = " << table.n_training_paths() << "\n";
  os << "# training_seed = " << table.training_seed() << "\n";
  for (int k = 2; k <= table.n_steps(); ++k) {
    const auto& rule = table.rule(k);
    os << "# transform step=" << k << " mean=";
    write_vector(os, rule.transform.mean);
    os << " scale=";
    write_vector(os, rule.transform.scale);
    os << "\n";
  }
  for (const StepDiagnostics& dg : table.diagnostics()) {
    os << "# diag step=" << dg.step << " status=" << status_name(dg.status)
       << " iterations=" << dg.iterations
       << " gradient_norm=" << fmt17(dg.gradient_norm)
       << " log_objective=" << fmt17(dg.log_objective) << "\n";
  }
  os << "step,asset,feature,coefficient\n";
  // Step-1 rows hold share counts; later rows hold dollar coefficients in
  // the standardized feature frame.
  for (int j = 0; j < d; ++j) {
    os << "1," << j << ",0," << fmt17(table.first_step_holdings()[j]) << "\n";
  }
  for (int k = 2; k <= table.n_steps(); ++k) {
    const auto& rule = table.rule(k);
    for (int j = 0; j < d; ++j) {
      for (int r = 0; r < R; ++r) {
        os << k << ',' << j << ',' << r << ',' << fmt17(rule.coeffs(j, r))
           << "\n";
      }
    }
  }
  if (!os) throw IoError("strategy: write failed");
}

StrategyTable load_strategy(std::istream& is) {
  std::string market_tag;
  int n_steps = -1;
  int n_assets = -1;
  std::string basis_descriptor;
  Eigen::VectorXd s0;
  double gamma = 0.0;
  double log_psi1 = 0.0;
  bool have_log_psi1 = false;
  std::int64_t training_paths = 0;
  std::uint64_t training_seed = 0;
  std::map<int, FeatureTransform> transforms;
  std::map<int, StepDiagnostics> diagnostics;
  std::map<std::pair<int, int>, std::map<int, double>> coeff_rows;

  auto meta_value = [](const std::string& line) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw IoError("strategy: malformed header line");
    auto value = line.substr(eq + 1);
    const auto start = value.find_first_not_of(' ');
    return (start == std::string::npos) ? std::string() : value.substr(start);
  };

  std::string line;
  bool header_seen = false;
  try {
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# market", 0) == 0) {
        market_tag = meta_value(line);
      } else if (line.rfind("# steps", 0) == 0) {
        n_steps = std::stoi(meta_value(line));
      } else if (line.rfind("# assets", 0) == 0) {
        n_assets = std::stoi(meta_value(line));
      } else if (line.rfind("# basis", 0) == 0) {
        basis_descriptor = meta_value(line);
      } else if (line.rfind("# s0", 0) == 0) {
        s0 = parse_vector(meta_value(line));
      } else if (line.rfind("# gamma", 0) == 0) {
        gamma = std::stod(meta_value(line));
      } else if (line.rfind("# log_psi1", 0) == 0) {
        log_psi1 = std::stod(meta_value(line));
        have_log_psi1 = true;
      } else if (line.rfind("# training_paths", 0) == 0) {
        training_paths = std::stoll(meta_value(line));
      } else if (line.rfind("# training_seed", 0) == 0) {
        training_seed = std::stoull(meta_value(line));
      } else if (line.rfind("# transform", 0) == 0) {
        auto fields = parse_fields(line.substr(1));
        FeatureTransform t;
        t.mean = parse_vector(fields.at("mean"));
        t.scale = parse_vector(fields.at("scale"));
        transforms[std::stoi(fields.at("step"))] = std::move(t);
      } else if (line.rfind("# diag", 0) == 0) {
        auto fields = parse_fields(line.substr(1));
        StepDiagnostics dg;
        dg.step = std::stoi(fields.at("step"));
        dg.status = status_from_name(fields.at("status"));
        dg.iterations = std::stoi(fields.at("iterations"));
        dg.gradient_norm = std::stod(fields.at("gradient_norm"));
        dg.log_objective = std::stod(fields.at("log_objective"));
        diagnostics[dg.step] = dg;
      }
      continue;
    }
    if (!header_seen) {
      if (line != "step,asset,feature,coefficient") {
        throw IoError("strategy: missing column header");
      }
      header_seen = true;
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    int step, asset, feature;
    double value;
    try {
      std::getline(ss, cell, ',');
      step = std::stoi(cell);
      std::getline(ss, cell, ',');
      asset = std::stoi(cell);
      std::getline(ss, cell, ',');
      feature = std::stoi(cell);
      std::getline(ss, cell, ',');
      value = std::stod(cell);
    } catch (const std::exception&) {
      throw IoError("strategy: bad data row '" + line + "'");
    }
    coeff_rows[{step, asset}][feature] = value;
  }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw IoError(std::string("strategy: parse error: ") + e.what());
  }

  if (n_steps < 1 || n_assets < 1 || basis_descriptor.empty() ||
      s0.size() != n_assets || !have_log_psi1) {
    throw IoError("strategy: incomplete header");
  }
  BasisSet basis = BasisSet::parse(basis_descriptor, s0);
  const int R = basis.size();

  Eigen::VectorXd h1(n_assets);
  for (int j = 0; j < n_assets; ++j) {
    auto it = coeff_rows.find({1, j});
    if (it == coeff_rows.end() || !it->second.count(0)) {
      throw IoError("strategy: missing step-1 holdings");
    }
    h1[j] = it->second.at(0);
  }
  std::vector<StrategyTable::StepRule> rules;
  rules.reserve(n_steps >= 2 ? n_steps - 1 : 0);
  for (int k = 2; k <= n_steps; ++k) {
    StrategyTable::StepRule rule;
    rule.coeffs.resize(n_assets, R);
    for (int j = 0; j < n_assets; ++j) {
      auto it = coeff_rows.find({k, j});
      if (it == coeff_rows.end()) {
        throw IoError("strategy: missing coefficients for step " +
                      std::to_string(k));
      }
      for (int r = 0; r < R; ++r) {
        if (!it->second.count(r)) {
          throw IoError("strategy: missing coefficient " + std::to_string(r) +
                        " at step " + std::to_string(k));
        }
        rule.coeffs(j, r) = it->second.at(r);
      }
    }
    auto t = transforms.find(k);
    if (t == transforms.end()) {
      throw IoError("strategy: missing transform for step " + std::to_string(k));
    }
    rule.transform = t->second;
    rules.push_back(std::move(rule));
  }
  std::vector<StepDiagnostics> diag;
  diag.reserve(n_steps);
  for (int k = 1; k <= n_steps; ++k) {
    auto it = diagnostics.find(k);
    if (it == diagnostics.end()) {
      throw IoError("strategy: missing diagnostics for step " + std::to_string(k));
    }
    diag.push_back(it->second);
  }
  return StrategyTable(market_tag, n_steps, std::move(basis), gamma,
                       std::move(h1), std::move(rules), log_psi1,
                       std::move(diag), training_paths, training_seed);
}

}  // namespace exphedge

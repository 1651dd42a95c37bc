#include "exphedge/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "exphedge/basis.hpp"
#include "exphedge/claims.hpp"
#include "exphedge/errors.hpp"

namespace exphedge {

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' is not a number: '" + text + "'");
  }
  if (used != text.size() || !std::isfinite(value)) {
    throw ConfigError("config: key '" + key + "' is not a number: '" + text + "'");
  }
  return value;
}

std::int64_t to_int(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  std::int64_t value = 0;
  try {
    value = std::stoll(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' is not an integer: '" + text + "'");
  }
  if (used != text.size()) {
    throw ConfigError("config: key '" + key + "' is not an integer: '" + text + "'");
  }
  return value;
}

std::uint64_t to_uint(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  std::uint64_t value = 0;
  try {
    value = std::stoull(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' is not an unsigned integer: '" +
                      text + "'");
  }
  if (used != text.size() || text.front() == '-') {
    throw ConfigError("config: key '" + key + "' is not an unsigned integer: '" +
                      text + "'");
  }
  return value;
}

bool to_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("config: key '" + key + "' must be true or false, got '" +
                    text + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  if (out.empty()) throw ConfigError("config: key '" + key + "' is empty");
  return out;
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += fmt17(values[i]);
  }
  return out;
}

std::string join(const Eigen::VectorXd& values) {
  std::string out;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += fmt17(values[i]);
  }
  return out;
}

// Rows separated by ';', entries by ','. A single scalar means sigma * I.
Eigen::MatrixXd to_matrix(const std::string& key, const std::string& text, int d) {
  std::vector<std::vector<double>> rows;
  std::stringstream ss(text);
  std::string row_text;
  while (std::getline(ss, row_text, ';')) {
    rows.push_back(to_list(key, trim(row_text)));
  }
  if (rows.size() == 1 && rows[0].size() == 1) {
    return rows[0][0] * Eigen::MatrixXd::Identity(d, d);
  }
  if (static_cast<int>(rows.size()) != d) {
    throw ConfigError("config: key '" + key + "' needs " + std::to_string(d) +
                      " rows");
  }
  Eigen::MatrixXd m(d, d);
  for (int i = 0; i < d; ++i) {
    if (static_cast<int>(rows[i].size()) != d) {
      throw ConfigError("config: key '" + key + "' row " + std::to_string(i) +
                        " needs " + std::to_string(d) + " entries");
    }
    for (int j = 0; j < d; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

Eigen::VectorXd to_vector(const std::string& key, const std::string& text, int d) {
  const std::vector<double> values = to_list(key, text);
  if (values.size() == 1) return Eigen::VectorXd::Constant(d, values[0]);
  if (static_cast<int>(values.size()) != d) {
    throw ConfigError("config: key '" + key + "' needs " + std::to_string(d) +
                      " entries");
  }
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v[i] = values[i];
  return v;
}

std::string matrix_text(const Eigen::MatrixXd& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (i) out += ';';
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += fmt17(m(i, j));
    }
  }
  return out;
}

}  // namespace

RunConfig RunConfig::defaults() {
  RunConfig cfg;
  cfg.resolve();
  return cfg;
}

RunConfig RunConfig::from_string(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: line " + std::to_string(line_no) +
                        " is not 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("config: line " + std::to_string(line_no) +
                        " is not 'key = value'");
    }
    if (kv.count(key)) {
      throw ConfigError("config: duplicate key '" + key + "'");
    }
    kv[key] = value;
  }

  RunConfig cfg;
  auto take = [&kv](const char* key) {
    auto it = kv.find(key);
    if (it == kv.end()) return std::string();
    std::string value = it->second;
    kv.erase(it);
    return value;
  };

  if (auto v = take("d"); !v.empty()) {
    cfg.d = static_cast<int>(to_int("d", v));
  }
  if (cfg.d < 1) throw ConfigError("config: d must be at least 1");
  if (auto v = take("mu"); !v.empty()) cfg.mu = to_vector("mu", v, cfg.d);
  if (auto v = take("sigma"); !v.empty()) cfg.sigma = to_matrix("sigma", v, cfg.d);
  if (auto v = take("r"); !v.empty()) cfg.r = to_double("r", v);
  if (auto v = take("s0"); !v.empty()) cfg.s0 = to_vector("s0", v, cfg.d);
  if (auto v = take("T"); !v.empty()) cfg.horizon = to_double("T", v);
  if (auto v = take("K"); !v.empty()) cfg.n_steps = static_cast<int>(to_int("K", v));
  if (auto v = take("claim"); !v.empty()) cfg.claim_spec = v;
  if (auto v = take("basis"); !v.empty()) cfg.basis_descriptor = v;
  if (auto v = take("gamma"); !v.empty()) cfg.gamma = to_double("gamma", v);
  if (auto v = take("report_gammas"); !v.empty()) {
    cfg.report_gammas = to_list("report_gammas", v);
  }
  if (auto v = take("report_levels"); !v.empty()) {
    cfg.report_levels = to_list("report_levels", v);
  }
  if (auto v = take("n_paths"); !v.empty()) cfg.n_paths = to_int("n_paths", v);
  if (auto v = take("n_eval_paths"); !v.empty()) {
    cfg.n_eval_paths = to_int("n_eval_paths", v);
  }
  if (auto v = take("seed"); !v.empty()) cfg.seed = to_uint("seed", v);
  if (auto v = take("eval_seed"); !v.empty()) {
    cfg.eval_seed = to_uint("eval_seed", v);
    cfg.has_eval_seed = true;
  }
  if (auto v = take("antithetic"); !v.empty()) {
    cfg.antithetic = to_bool("antithetic", v);
  }
  if (auto v = take("smoothing"); !v.empty()) {
    cfg.smoothing = to_double("smoothing", v);
  }
  if (auto v = take("in_sample"); !v.empty()) cfg.in_sample = to_bool("in_sample", v);
  if (auto v = take("hedge_path_index"); !v.empty()) {
    cfg.hedge_path_index = to_int("hedge_path_index", v);
  }
  if (auto v = take("tol_g"); !v.empty()) cfg.solver.tol_g = to_double("tol_g", v);
  if (auto v = take("tol_x"); !v.empty()) cfg.solver.tol_x = to_double("tol_x", v);
  if (auto v = take("max_iter"); !v.empty()) {
    cfg.solver.max_iter = static_cast<int>(to_int("max_iter", v));
  }
  if (auto v = take("coeff_cap"); !v.empty()) {
    cfg.solver.coeff_cap = to_double("coeff_cap", v);
  }
  if (auto v = take("ridge"); !v.empty()) cfg.solver.ridge = to_double("ridge", v);
  if (auto v = take("out_dir"); !v.empty()) cfg.out_dir = v;

  if (!kv.empty()) {
    throw ConfigError("config: unknown key '" + kv.begin()->first + "'");
  }
  cfg.resolve();
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw IoError("config: cannot open " + file.string());
  std::stringstream buffer;
  buffer << is.rdbuf();
  return from_string(buffer.str());
}

void RunConfig::resolve() {
  if (d < 1) throw ConfigError("config: d must be at least 1");
  if (mu.size() == 0) mu = Eigen::VectorXd::Constant(d, 0.1);
  if (sigma.size() == 0) sigma = 0.2 * Eigen::MatrixXd::Identity(d, d);
  if (s0.size() == 0) s0 = Eigen::VectorXd::Ones(d);
  if (n_eval_paths < 0) n_eval_paths = n_paths;
  if (!has_eval_seed) {
    eval_seed = seed + 1;
    has_eval_seed = true;
  }
  try {
    market();  // validates market block
    parse_claim(claim_spec);
    BasisSet::parse(basis_descriptor, s0);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (n_paths < 2) throw ConfigError("config: n_paths must be at least 2");
  if (n_eval_paths < 2) throw ConfigError("config: n_eval_paths must be at least 2");
  if (antithetic && (n_paths % 2 != 0 || n_eval_paths % 2 != 0)) {
    throw ConfigError("config: antithetic sampling needs even path counts");
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw ConfigError("config: gamma must be positive");
  }
  for (double g : report_gammas) {
    if (!(g > 0.0) || !std::isfinite(g)) {
      throw ConfigError("config: report_gammas must be positive");
    }
  }
  for (double c : report_levels) {
    if (!(c > 0.0 && c < 1.0)) {
      throw ConfigError("config: report_levels must lie in (0,1)");
    }
  }
  if (!(smoothing >= 0.0 && smoothing < 1.0)) {
    throw ConfigError("config: smoothing must lie in [0, 1)");
  }
  if (hedge_path_index < 0 ||
      hedge_path_index >= (in_sample ? n_paths : n_eval_paths)) {
    throw ConfigError("config: hedge_path_index out of range");
  }
  if (!(solver.tol_g > 0.0) || !(solver.tol_x > 0.0) || solver.max_iter < 1 ||
      !(solver.coeff_cap > 0.0) || !(solver.ridge >= 0.0)) {
    throw ConfigError("config: bad solver settings");
  }
  if (out_dir.empty()) throw ConfigError("config: out_dir must not be empty");
}

MarketParams RunConfig::market() const {
  Eigen::VectorXd mu_v = mu.size() ? mu : Eigen::VectorXd::Constant(d, 0.1);
  Eigen::MatrixXd sigma_m =
      sigma.size() ? sigma : 0.2 * Eigen::MatrixXd::Identity(d, d);
  Eigen::VectorXd s0_v = s0.size() ? s0 : Eigen::VectorXd::Ones(d);
  return MarketParams(std::move(mu_v), std::move(sigma_m), r, std::move(s0_v),
                      horizon, n_steps);
}

std::string RunConfig::to_string() const {
  std::string out;
  out += "# experiment configuration (resolved)\n";
  out += "d = " + std::to_string(d) + "\n";
  out += "mu = " + join(mu) + "\n";
  out += "sigma = " + matrix_text(sigma) + "\n";
  out += "r = " + fmt17(r) + "\n";
  out += "s0 = " + join(s0) + "\n";
  out += "T = " + fmt17(horizon) + "\n";
  out += "K = " + std::to_string(n_steps) + "\n";
  out += "claim = " + claim_spec + "\n";
  out += "basis = " + basis_descriptor + "\n";
  out += "gamma = " + fmt17(gamma) + "\n";
  out += "report_gammas = " + join(report_gammas) + "\n";
  out += "report_levels = " + join(report_levels) + "\n";
  out += "n_paths = " + std::to_string(n_paths) + "\n";
  out += "n_eval_paths = " + std::to_string(n_eval_paths) + "\n";
  out += "seed = " + std::to_string(seed) + "\n";
  out += "eval_seed = " + std::to_string(eval_seed) + "\n";
  out += "antithetic = " + std::string(antithetic ? "true" : "false") + "\n";
  out += "smoothing = " + fmt17(smoothing) + "\n";
  out += "in_sample = " + std::string(in_sample ? "true" : "false") + "\n";
  out += "hedge_path_index = " + std::to_string(hedge_path_index) + "\n";
  out += "tol_g = " + fmt17(solver.tol_g) + "\n";
  out += "tol_x = " + fmt17(solver.tol_x) + "\n";
  out += "max_iter = " + std::to_string(solver.max_iter) + "\n";
  out += "coeff_cap = " + fmt17(solver.coeff_cap) + "\n";
  out += "ridge = " + fmt17(solver.ridge) + "\n";
  out += "out_dir = " + out_dir + "\n";
  return out;
}

void RunConfig::save(const std::filesystem::path& file) const {
  std::ofstream os(file);
  if (!os) throw IoError("config: cannot write " + file.string());
  os << to_string();
  if (!os) throw IoError("config: write failed for " + file.string());
}

}  // namespace exphedge

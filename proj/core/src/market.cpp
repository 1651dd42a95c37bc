#include "exphedge/market.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <utility>

#include "exphedge/errors.hpp"
#include "exphedge/parallel.hpp"
#include "exphedge/rng.hpp"

namespace exphedge {

namespace {

void require_finite(const Eigen::Ref<const Eigen::MatrixXd>& m, const char* what) {
  if (!m.allFinite()) {
    throw InvalidParams(std::string(what) + " contains a non-finite entry");
  }
}

void append_num(std::string& out, double x, int digits) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  out += buf;
}

}  // namespace

MarketParams::MarketParams(Eigen::VectorXd mu, Eigen::MatrixXd sigma, double r,
                           Eigen::VectorXd s0, double horizon, int n_steps)
    : mu_(std::move(mu)),
      sigma_(std::move(sigma)),
      r_(r),
      s0_(std::move(s0)),
      horizon_(horizon),
      n_steps_(n_steps) {
  const auto d = mu_.size();
  if (d < 1) throw InvalidParams("market: need at least one asset");
  if (sigma_.rows() != d || sigma_.cols() != d) {
    throw DimensionMismatch("market: sigma must be d x d");
  }
  if (s0_.size() != d) throw DimensionMismatch("market: s0 must have d entries");
  require_finite(mu_, "mu");
  require_finite(sigma_, "sigma");
  require_finite(s0_, "s0");
  if (!std::isfinite(r_)) throw InvalidParams("market: r must be finite");
  if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) {
    throw InvalidParams("market: horizon must be positive");
  }
  if (n_steps_ < 1) throw InvalidParams("market: need at least one step");
  if ((s0_.array() <= 0.0).any()) {
    throw InvalidParams("market: initial prices must be positive");
  }

  cov_ = sigma_ * sigma_.transpose();

  Eigen::FullPivLU<Eigen::MatrixXd> lu(sigma_);
  // Relative rank threshold; rejects matrices that are singular to working
  // precision, not merely badly scaled.
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) {
    throw SingularSigma("market: sigma is singular, market price of risk undefined");
  }
  lambda_ = lu.solve(mu_ - Eigen::VectorXd::Constant(d, r_));
}

MarketParams MarketParams::one_asset(double mu, double sigma, double r,
                                     double s0, double horizon, int n_steps) {
  Eigen::VectorXd m(1), s(1);
  m << mu;
  s << s0;
  Eigen::MatrixXd v(1, 1);
  v << sigma;
  return MarketParams(m, v, r, s, horizon, n_steps);
}

std::string MarketParams::tag() const {
  std::string out = "gbm(d=";
  out += std::to_string(n_assets());
  out += ",mu=";
  for (Eigen::Index j = 0; j < mu_.size(); ++j) {
    if (j) out += ' ';
    append_num(out, mu_[j], 17);
  }
  out += ",sigma=";
  for (Eigen::Index i = 0; i < sigma_.rows(); ++i) {
    if (i) out += ';';
    for (Eigen::Index j = 0; j < sigma_.cols(); ++j) {
      if (j) out += ' ';
      append_num(out, sigma_(i, j), 17);
    }
  }
  out += ",r=";
  append_num(out, r_, 17);
  out += ",s0=";
  for (Eigen::Index j = 0; j < s0_.size(); ++j) {
    if (j) out += ' ';
    append_num(out, s0_[j], 17);
  }
  out += ",T=";
  append_num(out, horizon_, 17);
  out += ",K=";
  out += std::to_string(n_steps_);
  out += ')';
  return out;
}

PathSet::PathSet(int n_paths, int n_steps, int n_assets,
                 std::vector<double> states, std::string source_tag)
    : n_paths_(n_paths),
      n_steps_(n_steps),
      n_assets_(n_assets),
      states_(std::move(states)),
      source_tag_(std::move(source_tag)) {
  if (n_paths_ < 1 || n_steps_ < 1 || n_assets_ < 1) {
    throw InvalidParams("path set: empty dimension");
  }
  const std::size_t expect = static_cast<std::size_t>(n_paths_) *
                             (n_steps_ + 1) * n_assets_;
  if (states_.size() != expect) {
    throw DimensionMismatch("path set: state buffer has wrong length");
  }
  for (double s : states_) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw InvalidParams("path set: prices must be positive and finite");
    }
  }
  increments_.resize(static_cast<std::size_t>(n_paths_) * n_steps_ * n_assets_);
  for_blocks(static_cast<std::size_t>(n_paths_), kDefaultBlock,
             [&](std::size_t begin, std::size_t end) {
               for (std::size_t i = begin; i < end; ++i) {
                 for (int k = 0; k < n_steps_; ++k) {
                   const double* a = state_row(static_cast<int>(i), k);
                   const double* b = state_row(static_cast<int>(i), k + 1);
                   double* out = increments_.data() +
                                 (i * n_steps_ + k) * n_assets_;
                   for (int j = 0; j < n_assets_; ++j) out[j] = b[j] - a[j];
                 }
               }
             });
}

PathSet simulate_gbm(const MarketParams& params, const SimConfig& cfg) {
  if (cfg.n_paths < 2) throw InvalidParams("simulate: need at least two paths");
  if (cfg.antithetic && cfg.n_paths % 2 != 0) {
    throw InvalidParams("simulate: antithetic sampling needs an even n_paths");
  }
  const int d = params.n_assets();
  const int K = params.n_steps();
  const std::int64_t N = cfg.n_paths;
  const double dt = params.dt();
  const double sqrt_dt = std::sqrt(dt);

  // Prices are in discounted units, so the per-step drift of log S_j is
  // (mu_j - r - cov_jj / 2) dt.
  Eigen::VectorXd log_drift(d);
  for (int j = 0; j < d; ++j) {
    log_drift[j] =
        (params.drift()[j] - params.rate() - 0.5 * params.covariance()(j, j)) * dt;
  }
  Eigen::VectorXd log_s0(d);
  for (int j = 0; j < d; ++j) log_s0[j] = std::log(params.spot0()[j]);
  const Eigen::MatrixXd& sigma = params.vol();

  std::vector<double> states(static_cast<std::size_t>(N) * (K + 1) * d);

  // One stream per path (per pair when antithetic); blocks write disjoint
  // ranges, so the fill is deterministic under any thread count.
  const std::int64_t units = cfg.antithetic ? N / 2 : N;
  for_blocks(static_cast<std::size_t>(units), kDefaultBlock,
             [&](std::size_t begin, std::size_t end) {
    Eigen::VectorXd xi(d), logs(d), logs_anti(d);
    for (std::size_t u = begin; u < end; ++u) {
      Xoshiro256ss rng = make_path_stream(cfg.seed, u);
      const std::size_t i0 = cfg.antithetic ? 2 * u : u;
      logs = log_s0;
      if (cfg.antithetic) logs_anti = log_s0;
      double* row0 = states.data() + i0 * (K + 1) * d;
      for (int j = 0; j < d; ++j) row0[j] = params.spot0()[j];
      if (cfg.antithetic) {
        double* row1 = states.data() + (i0 + 1) * (K + 1) * d;
        for (int j = 0; j < d; ++j) row1[j] = params.spot0()[j];
      }
      for (int k = 1; k <= K; ++k) {
        for (int j = 0; j < d; ++j) xi[j] = rng.normal();
        Eigen::VectorXd shock = sqrt_dt * (sigma * xi);
        logs += log_drift + shock;
        double* row = states.data() + (i0 * (K + 1) + k) * d;
        for (int j = 0; j < d; ++j) row[j] = std::exp(logs[j]);
        if (cfg.antithetic) {
          logs_anti += log_drift - shock;
          double* arow = states.data() + ((i0 + 1) * (K + 1) + k) * d;
          for (int j = 0; j < d; ++j) arow[j] = std::exp(logs_anti[j]);
        }
      }
    }
  });

  return PathSet(static_cast<int>(N), K, d, std::move(states), params.tag());
}

Eigen::VectorXd market_price_of_risk(const MarketParams& params) {
  return params.lambda();
}

void export_paths_csv(const PathSet& paths, std::ostream& os) {
  os << "path,step,asset,price\n";
  char buf[40];
  for (int i = 0; i < paths.n_paths(); ++i) {
    for (int k = 0; k <= paths.n_steps(); ++k) {
      for (int j = 0; j < paths.n_assets(); ++j) {
        std::snprintf(buf, sizeof buf, "%.12g", paths.state(i, k, j));
        os << i << ',' << k << ',' << j << ',' << buf << '\n';
      }
    }
  }
  if (!os) throw IoError("paths csv: write failed");
}

}  // namespace exphedge

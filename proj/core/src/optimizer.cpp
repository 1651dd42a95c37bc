#include "exphedge/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "exphedge/errors.hpp"
#include "exphedge/parallel.hpp"

namespace exphedge {

void ObjectiveData::validate() const {
  if (n_paths < 1) throw DegenerateData("objective: need at least one path");
  if (n_features < 1) throw InvalidParams("objective: need at least one feature");
  if (n_assets < 1) throw InvalidParams("objective: need at least one asset");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw InvalidParams("objective: gamma must be positive and finite");
  }
  const auto N = static_cast<std::size_t>(n_paths);
  if (features.size() != N * n_features) {
    throw DimensionMismatch("objective: feature buffer has wrong length");
  }
  if (increments.size() != N * n_assets) {
    throw DimensionMismatch("objective: increment buffer has wrong length");
  }
  if (carry.size() != N) {
    throw DimensionMismatch("objective: carry buffer has wrong length");
  }
  for (double v : features) {
    if (!std::isfinite(v)) throw NonFiniteFeature("objective: non-finite feature");
  }
  for (double v : increments) {
    if (!std::isfinite(v)) throw InvalidParams("objective: non-finite increment");
  }
  for (double v : carry) {
    if (!std::isfinite(v)) throw InvalidParams("objective: non-finite carry");
  }
}

namespace {

// Shared evaluation state. The design row for path i is the outer product
// of its increments and features flattened asset-major; the exponent is
// then the affine function a_i(c) = -gamma * xi_i . c + e_i.
class ExpObjective {
 public:
  explicit ExpObjective(const ObjectiveData& data)
      : data_(data), n_(data.n_assets * data.n_features) {
    data_.validate();
    const std::size_t N = static_cast<std::size_t>(data_.n_paths);
    design_.resize(N * n_);
    const int R = data_.n_features;
    const int d = data_.n_assets;
    for_blocks(N, kDefaultBlock, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        const double* f = data_.features.data() + i * R;
        const double* y = data_.increments.data() + i * d;
        double* row = design_.data() + i * n_;
        for (int j = 0; j < d; ++j) {
          for (int r = 0; r < R; ++r) row[j * R + r] = y[j] * f[r];
        }
      }
    });
    exponents_.resize(N);
  }

  int dim() const { return n_; }

  void check_coeff_shape(const Eigen::MatrixXd& coeffs) const {
    if (coeffs.rows() != data_.n_assets || coeffs.cols() != data_.n_features) {
      throw DimensionMismatch("objective: coefficients must be d x R");
    }
    if (!coeffs.allFinite()) {
      throw InvalidParams("objective: coefficients must be finite");
    }
  }

  // Flattened view (asset-major) of a d x R coefficient matrix.
  Eigen::VectorXd flatten(const Eigen::MatrixXd& coeffs) const {
    Eigen::VectorXd c(n_);
    const int R = data_.n_features;
    for (int j = 0; j < data_.n_assets; ++j) {
      for (int r = 0; r < R; ++r) c[j * R + r] = coeffs(j, r);
    }
    return c;
  }

  Eigen::MatrixXd unflatten(const Eigen::VectorXd& c) const {
    Eigen::MatrixXd m(data_.n_assets, data_.n_features);
    const int R = data_.n_features;
    for (int j = 0; j < data_.n_assets; ++j) {
      for (int r = 0; r < R; ++r) m(j, r) = c[j * R + r];
    }
    return m;
  }

  // Fills exponents_ with a_i(c) and returns their maximum.
  double fill_exponents(const Eigen::VectorXd& c) {
    const std::size_t N = static_cast<std::size_t>(data_.n_paths);
    const double gamma = data_.gamma;
    const double max_a = blocked_reduce<double>(
        N, kDefaultBlock, -std::numeric_limits<double>::infinity(),
        [&](std::size_t begin, std::size_t end) {
          double m = -std::numeric_limits<double>::infinity();
          for (std::size_t i = begin; i < end; ++i) {
            const double* row = design_.data() + i * n_;
            double dot = 0.0;
            for (int t = 0; t < n_; ++t) dot += row[t] * c[t];
            const double a = -gamma * dot + data_.carry[i];
            exponents_[i] = a;
            if (a > m) m = a;
          }
          return m;
        },
        [](double a, double b) { return std::max(a, b); });
    return max_a;
  }

  // log Psi(c); always finite for finite inputs.
  double log_value(const Eigen::VectorXd& c) {
    const double max_a = fill_exponents(c);
    const std::size_t N = static_cast<std::size_t>(data_.n_paths);
    const double sum = blocked_reduce<double>(
        N, kDefaultBlock, 0.0,
        [&](std::size_t begin, std::size_t end) {
          double s = 0.0;
          for (std::size_t i = begin; i < end; ++i) {
            s += std::exp(exponents_[i] - max_a);
          }
          return s;
        },
        [](double a, double b) { return a + b; });
    return max_a + std::log(sum / static_cast<double>(N));
  }

  // log Psi together with the gradient and Hessian of log Psi.
  // grad = -gamma * sum_i w_i xi_i / W,
  // hess = gamma^2 * sum_i w_i xi_i xi_i^T / W - grad grad^T  (PSD).
  double log_value_grad_hess(const Eigen::VectorXd& c, Eigen::VectorXd& grad,
                             Eigen::MatrixXd& hess) {
    const double max_a = fill_exponents(c);
    const std::size_t N = static_cast<std::size_t>(data_.n_paths);
    const double gamma = data_.gamma;

    struct Acc {
      double w_sum = 0.0;
      Eigen::VectorXd first;
      Eigen::MatrixXd second;
    };
    Acc init;
    init.first = Eigen::VectorXd::Zero(n_);
    init.second = Eigen::MatrixXd::Zero(n_, n_);

    Acc total = blocked_reduce<Acc>(
        N, kDefaultBlock, init,
        [&](std::size_t begin, std::size_t end) {
          Acc acc;
          acc.first = Eigen::VectorXd::Zero(n_);
          acc.second = Eigen::MatrixXd::Zero(n_, n_);
          Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                         Eigen::RowMajor>>
              rows(design_.data() + begin * n_, end - begin, n_);
          for (std::size_t i = begin; i < end; ++i) {
            const double w = std::exp(exponents_[i] - max_a);
            acc.w_sum += w;
            const auto xi = rows.row(i - begin);
            acc.first.noalias() += w * xi.transpose();
            acc.second.selfadjointView<Eigen::Lower>().rankUpdate(
                xi.transpose(), w);
          }
          return acc;
        },
        [](Acc a, const Acc& b) {
          a.w_sum += b.w_sum;
          a.first += b.first;
          a.second += b.second;
          return a;
        });

    total.second = total.second.selfadjointView<Eigen::Lower>();
    grad = (-gamma / total.w_sum) * total.first;
    hess = (gamma * gamma / total.w_sum) * total.second;
    hess.noalias() -= grad * grad.transpose();
    return max_a + std::log(total.w_sum / static_cast<double>(N));
  }

 private:
  const ObjectiveData& data_;
  int n_;
  std::vector<double> design_;
  std::vector<double> exponents_;
};

}  // namespace

const char* to_string(OptimStatus status) {
  switch (status) {
    case OptimStatus::converged:
      return "converged";
    case OptimStatus::max_iter:
      return "max_iter";
    case OptimStatus::unbounded:
      return "unbounded";
    case OptimStatus::regularized:
      return "regularized";
  }
  return "unknown";
}

double objective_log(const ObjectiveData& data, const Eigen::MatrixXd& coeffs) {
  ExpObjective obj(data);
  obj.check_coeff_shape(coeffs);
  return obj.log_value(obj.flatten(coeffs));
}

double objective(const ObjectiveData& data, const Eigen::MatrixXd& coeffs) {
  const double lv = objective_log(data, coeffs);
  const double value = std::exp(lv);
  if (!std::isfinite(value) || value <= 0.0) {
    throw OverflowError("objective: value is not representable; use objective_log");
  }
  return value;
}

void gradient_hessian(const ObjectiveData& data, const Eigen::MatrixXd& coeffs,
                      Eigen::VectorXd& grad, Eigen::MatrixXd& hess) {
  ExpObjective obj(data);
  obj.check_coeff_shape(coeffs);
  Eigen::VectorXd g_log;
  Eigen::MatrixXd h_log;
  const double lv = obj.log_value_grad_hess(obj.flatten(coeffs), g_log, h_log);
  const double psi = std::exp(lv);
  if (!std::isfinite(psi)) {
    throw OverflowError("gradient_hessian: objective overflows double range");
  }
  grad = psi * g_log;
  hess = psi * (h_log + g_log * g_log.transpose());
}

OptimResult minimize(const ObjectiveData& data, const SolverOptions& opts,
                     const Eigen::MatrixXd* warm_start) {
  if (data.n_paths < 2) {
    throw DegenerateData("minimize: need at least two paths");
  }
  if (!(opts.tol_g > 0.0) || !(opts.tol_x > 0.0) || opts.max_iter < 1 ||
      !(opts.coeff_cap > 0.0) || !(opts.ridge >= 0.0)) {
    throw InvalidParams("minimize: bad solver options");
  }
  ExpObjective obj(data);
  const int n = obj.dim();

  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  if (warm_start) {
    obj.check_coeff_shape(*warm_start);
    c = obj.flatten(*warm_start);
  }

  OptimResult result;
  bool ridge_used = false;

  Eigen::VectorXd grad(n);
  Eigen::MatrixXd hess(n, n);
  double lv = obj.log_value_grad_hess(c, grad, hess);
  const double g0 = std::max(1.0, grad.norm());

  constexpr double kArmijo = 1e-4;
  int iter = 0;
  OptimStatus status = OptimStatus::max_iter;

  while (iter < opts.max_iter) {
    if (grad.norm() <= opts.tol_g * g0) {
      status = ridge_used ? OptimStatus::regularized : OptimStatus::converged;
      break;
    }
    ++iter;

    // Newton direction; escalate ridge until the factorization yields a
    // descent direction. The Hessian of log Psi is PSD, so this terminates.
    Eigen::VectorXd p;
    double mu = 0.0;
    const double trace_scale = std::max(hess.trace() / n, 1e-300);
    for (int attempt = 0;; ++attempt) {
      Eigen::MatrixXd h = hess;
      if (mu > 0.0) h.diagonal().array() += mu;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
      bool ok = (ldlt.info() == Eigen::Success);
      if (ok) {
        p = ldlt.solve(-grad);
        ok = p.allFinite() && grad.dot(p) < 0.0;
      }
      if (ok) break;
      if (attempt > 60) {
        p = -grad;  // steepest descent as a last resort
        break;
      }
      mu = (mu == 0.0) ? opts.ridge * trace_scale : 10.0 * mu;
      ridge_used = true;
    }

    // Backtracking line search on log Psi.
    const double slope = grad.dot(p);
    double alpha = 1.0;
    double lv_new = lv;
    Eigen::VectorXd c_new;
    bool accepted = false;
    const double flat = 1e-14 * std::max(1.0, std::fabs(lv));
    for (int ls = 0; ls < 60; ++ls) {
      c_new = c + alpha * p;
      lv_new = obj.log_value(c_new);
      if (lv_new <= lv + kArmijo * alpha * slope) {
        accepted = true;
        break;
      }
      // Noise-floor acceptance: the predicted decrease is below double
      // resolution of the objective, so the iterate is as good as converged.
      if (std::fabs(alpha * slope) <= flat && lv_new <= lv + flat) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      status = ridge_used ? OptimStatus::regularized : OptimStatus::converged;
      break;
    }

    const double step_norm = alpha * p.norm();
    c = c_new;
    lv = obj.log_value_grad_hess(c, grad, hess);

    if (c.lpNorm<Eigen::Infinity>() > opts.coeff_cap) {
      status = OptimStatus::unbounded;
      break;
    }
    if (step_norm <= opts.tol_x * (1.0 + c.norm())) {
      if (grad.norm() <= opts.tol_g * g0) {
        status = ridge_used ? OptimStatus::regularized : OptimStatus::converged;
      } else {
        status = OptimStatus::max_iter;
      }
      break;
    }
  }
  if (iter >= opts.max_iter && status == OptimStatus::max_iter &&
      grad.norm() <= opts.tol_g * g0) {
    status = ridge_used ? OptimStatus::regularized : OptimStatus::converged;
  }

  result.coefficients = obj.unflatten(c);
  result.log_objective = lv;
  result.objective_value = std::exp(lv);
  result.gradient_norm = grad.norm();
  result.iterations = iter;
  result.status = status;
  return result;
}

}  // namespace exphedge

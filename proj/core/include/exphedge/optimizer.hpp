#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace exphedge {

// One-step sample criterion
//
//   Psi(c) = (1/N) sum_i exp( -gamma * sum_{j,r} c_{jr} f_r(i) y_{ij} + e_i )
//
// where f are feature values, y are price increments earned by the rule and
// e is the per-path carry accumulated from later steps and the claim.
// Psi is a positive average of exponentials of affine functions of c, so
// log Psi is convex; the minimizer works on the log scale throughout.
struct ObjectiveData {
  int n_paths = 0;
  int n_features = 0;
  int n_assets = 0;
  std::vector<double> features;    // [N][R], row-major
  std::vector<double> increments;  // [N][d], row-major
  std::vector<double> carry;       // [N]
  double gamma = 1.0;

  void validate() const;  // shapes, finiteness, gamma > 0
};

struct SolverOptions {
  double tol_g = 1e-8;      // on ||grad log Psi||, relative to the start
  double tol_x = 1e-10;     // on the step norm, relative to ||c||
  int max_iter = 100;
  double coeff_cap = 1e3;   // ||c||_inf beyond this is treated as divergence
  double ridge = 1e-8;      // Hessian regularization scale, relative to trace
};

enum class OptimStatus { converged, max_iter, unbounded, regularized };

const char* to_string(OptimStatus status);

struct OptimResult {
  Eigen::MatrixXd coefficients;  // d x R
  double objective_value = 0.0;  // Psi at the final iterate
  double log_objective = 0.0;    // log Psi, always finite
  double gradient_norm = 0.0;    // ||grad log Psi|| at the final iterate
  int iterations = 0;
  OptimStatus status = OptimStatus::max_iter;
};

// Psi(c). Throws OverflowError if the value cannot be represented.
double objective(const ObjectiveData& data, const Eigen::MatrixXd& coeffs);

// log Psi(c), computed with a max shift; finite for any finite input.
double objective_log(const ObjectiveData& data, const Eigen::MatrixXd& coeffs);

// Gradient and Hessian of Psi (not of its log) with coefficients flattened
// asset-major: index j * R + r.
void gradient_hessian(const ObjectiveData& data, const Eigen::MatrixXd& coeffs,
                      Eigen::VectorXd& grad, Eigen::MatrixXd& hess);

// Damped Newton on log Psi with Armijo backtracking. Detects directions of
// unbounded decrease via the coefficient cap. warm_start, if given, must be
// d x R.
OptimResult minimize(const ObjectiveData& data, const SolverOptions& opts = {},
                     const Eigen::MatrixXd* warm_start = nullptr);

}  // namespace exphedge

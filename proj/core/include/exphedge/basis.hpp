#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "exphedge/market.hpp"

namespace exphedge {

// Custom feature block: fills `out` with `extra` values computed from the
// d prices in `state` and the reference spots in `s0`.
struct CustomFeatureMap {
  int extra = 0;
  std::function<void(const double* state, const double* s0, int d, double* out)>
      eval;
};

// Family of functions of the current price state used to parametrize one
// step's allocation rule. Function 0 is always the constant 1, so every
// constant rule lies in the span. Polynomial families act on moneyness
// m_j = S_j / S0_j, which keeps features O(1) across price levels.
class BasisSet {
 public:
  static BasisSet poly(int degree, Eigen::VectorXd s0);
  static BasisSet custom(std::string name, Eigen::VectorXd s0);

  // Grammar: "poly:<degree>" | "custom:<name>".
  static BasisSet parse(const std::string& descriptor, Eigen::VectorXd s0);

  int size() const { return n_features_; }
  int n_assets() const { return static_cast<int>(s0_.size()); }
  const std::string& descriptor() const { return descriptor_; }
  const Eigen::VectorXd& spot0() const { return s0_; }

  // Writes size() values; throws NonFiniteFeature on NaN/Inf.
  void evaluate(const double* state, double* out) const;
  Eigen::VectorXd evaluate(const Eigen::VectorXd& state) const;

 private:
  BasisSet() = default;
  std::string descriptor_;
  Eigen::VectorXd s0_;
  int n_features_ = 0;
  int degree_ = 0;
  CustomFeatureMap custom_;
};

// Registers a feature block under "custom:<name>". Process-wide; call during
// startup, not concurrently with parsing.
void register_custom_basis(const std::string& name, CustomFeatureMap map);

// Basis values cached for every path at the decision times k = 1 .. K-1
// (time 0 features are just the constant column and are not stored).
struct FeatureMatrix {
  int n_paths = 0;
  int n_features = 0;
  int first_step = 1;
  int last_step = 0;
  std::vector<double> data;  // [(step - first_step) * N + i] * R + r

  double at(int step, int i, int r) const {
    return data[(static_cast<std::size_t>(step - first_step) * n_paths + i) *
                    n_features + r];
  }
};

FeatureMatrix precompute(const BasisSet& basis, const PathSet& paths);

// Affine per-feature rescale fitted on a sample: feature 0 is untouched,
// every other feature is centered and scaled to unit sample std. Features
// with zero sample spread keep scale 1 so the transform stays invertible.
struct FeatureTransform {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  void apply(double* features) const {
    for (Eigen::Index r = 1; r < mean.size(); ++r) {
      features[r] = (features[r] - mean[r]) / scale[r];
    }
  }
  static FeatureTransform identity(int n_features);
};

// rows: N samples of R raw feature values, row-major.
FeatureTransform fit_feature_transform(const double* rows, int n, int n_features);

}  // namespace exphedge

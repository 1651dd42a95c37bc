#include "exphedge/basis.hpp"

#include <cmath>
#include <map>

#include "exphedge/errors.hpp"
#include "exphedge/parallel.hpp"

namespace exphedge {

namespace {

std::map<std::string, CustomFeatureMap>& basis_registry() {
  static std::map<std::string, CustomFeatureMap> reg;
  return reg;
}

}  // namespace

BasisSet BasisSet::poly(int degree, Eigen::VectorXd s0) {
  if (degree < 0) throw InvalidParams("basis: polynomial degree must be >= 0");
  if (s0.size() < 1 || (s0.array() <= 0.0).any() || !s0.allFinite()) {
    throw InvalidParams("basis: reference spots must be positive and finite");
  }
  BasisSet b;
  b.descriptor_ = "poly:" + std::to_string(degree);
  b.s0_ = std::move(s0);
  b.degree_ = degree;
  b.n_features_ = 1 + static_cast<int>(b.s0_.size()) * degree;
  return b;
}

BasisSet BasisSet::custom(std::string name, Eigen::VectorXd s0) {
  if (s0.size() < 1 || (s0.array() <= 0.0).any() || !s0.allFinite()) {
    throw InvalidParams("basis: reference spots must be positive and finite");
  }
  const auto& reg = basis_registry();
  auto it = reg.find(name);
  if (it == reg.end()) {
    throw InvalidParams("basis: no custom feature map registered under '" + name + "'");
  }
  if (it->second.extra < 0 || !it->second.eval) {
    throw InvalidParams("basis: registered feature map '" + name + "' is malformed");
  }
  BasisSet b;
  b.descriptor_ = "custom:" + name;
  b.s0_ = std::move(s0);
  b.custom_ = it->second;
  b.n_features_ = 1 + it->second.extra;
  return b;
}

BasisSet BasisSet::parse(const std::string& descriptor, Eigen::VectorXd s0) {
  if (descriptor.rfind("poly:", 0) == 0) {
    const std::string text = descriptor.substr(5);
    std::size_t used = 0;
    int degree = 0;
    try {
      degree = std::stoi(text, &used);
    } catch (const std::exception&) {
      throw InvalidParams("basis: bad degree '" + text + "'");
    }
    if (used != text.size() || degree < 0) {
      throw InvalidParams("basis: bad degree '" + text + "'");
    }
    return poly(degree, std::move(s0));
  }
  if (descriptor.rfind("custom:", 0) == 0) {
    return custom(descriptor.substr(7), std::move(s0));
  }
  throw InvalidParams("basis: unrecognized descriptor '" + descriptor + "'");
}

void BasisSet::evaluate(const double* state, double* out) const {
  out[0] = 1.0;
  const int d = n_assets();
  if (custom_.eval) {
    custom_.eval(state, s0_.data(), d, out + 1);
  } else {
    int pos = 1;
    for (int j = 0; j < d; ++j) {
      const double m = state[j] / s0_[j];
      double p = 1.0;
      for (int q = 0; q < degree_; ++q) {
        p *= m;
        out[pos++] = p;
      }
    }
  }
  for (int r = 0; r < n_features_; ++r) {
    if (!std::isfinite(out[r])) {
      throw NonFiniteFeature("basis: feature " + std::to_string(r) +
                             " is non-finite");
    }
  }
}

Eigen::VectorXd BasisSet::evaluate(const Eigen::VectorXd& state) const {
  if (state.size() != s0_.size()) {
    throw DimensionMismatch("basis: state has wrong number of assets");
  }
  Eigen::VectorXd out(n_features_);
  evaluate(state.data(), out.data());
  return out;
}

void register_custom_basis(const std::string& name, CustomFeatureMap map) {
  if (name.empty()) throw InvalidParams("basis: custom name must not be empty");
  if (map.extra < 0 || !map.eval) {
    throw InvalidParams("basis: custom feature map is malformed");
  }
  basis_registry()[name] = std::move(map);
}

FeatureMatrix precompute(const BasisSet& basis, const PathSet& paths) {
  if (basis.n_assets() != paths.n_assets()) {
    throw DimensionMismatch("precompute: basis and paths disagree on asset count");
  }
  FeatureMatrix fm;
  fm.n_paths = paths.n_paths();
  fm.n_features = basis.size();
  fm.first_step = 1;
  fm.last_step = paths.n_steps() - 1;
  if (fm.last_step < fm.first_step) return fm;

  const int n_stored = fm.last_step - fm.first_step + 1;
  fm.data.resize(static_cast<std::size_t>(n_stored) * fm.n_paths * fm.n_features);
  const int R = fm.n_features;
  for (int k = fm.first_step; k <= fm.last_step; ++k) {
    double* step_base =
        fm.data.data() +
        static_cast<std::size_t>(k - fm.first_step) * fm.n_paths * R;
    for_blocks(static_cast<std::size_t>(fm.n_paths), kDefaultBlock,
               [&](std::size_t begin, std::size_t end) {
                 for (std::size_t i = begin; i < end; ++i) {
                   basis.evaluate(paths.state_row(static_cast<int>(i), k),
                                  step_base + i * R);
                 }
               });
  }
  return fm;
}

FeatureTransform FeatureTransform::identity(int n_features) {
  FeatureTransform t;
  t.mean = Eigen::VectorXd::Zero(n_features);
  t.scale = Eigen::VectorXd::Ones(n_features);
  return t;
}

FeatureTransform fit_feature_transform(const double* rows, int n, int n_features) {
  if (n < 1) throw DegenerateData("feature transform: empty sample");
  FeatureTransform t = FeatureTransform::identity(n_features);
  for (int r = 1; r < n_features; ++r) {
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += rows[static_cast<std::size_t>(i) * n_features + r];
    mean /= n;
    double var = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = rows[static_cast<std::size_t>(i) * n_features + r] - mean;
      var += d * d;
    }
    var /= n;
    const double sd = std::sqrt(var);
    t.mean[r] = mean;
    t.scale[r] = (sd > 0.0) ? sd : 1.0;
  }
  return t;
}

}  // namespace exphedge

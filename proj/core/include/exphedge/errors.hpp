#pragma once

#include <stdexcept>
#include <string>

namespace exphedge {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad model or solver inputs (non-finite, wrong sign, empty, ...).
struct InvalidParams : Error {
  using Error::Error;
};

// Volatility matrix is not invertible, so the market price of risk is undefined.
struct SingularSigma : InvalidParams {
  using InvalidParams::InvalidParams;
};

// Containers whose shapes must agree do not.
struct DimensionMismatch : Error {
  using Error::Error;
};

// A basis function produced NaN or Inf on a sample state.
struct NonFiniteFeature : Error {
  using Error::Error;
};

// An exponential moment is not representable in double precision.
struct OverflowError : Error {
  using Error::Error;
};

// Sample is unusable for estimation (too few paths, zero variance where
// variation is required, ...).
struct DegenerateData : Error {
  using Error::Error;
};

// The one-step allocation problem has no finite minimizer. Carries the
// 1-based time step at which the learner detected it.
struct UnboundedStep : Error {
  int step;
  explicit UnboundedStep(int step_, const std::string& what_)
      : Error(what_), step(step_) {}
};

// A solver step stopped without reaching its tolerances.
struct ConvergenceFailure : Error {
  using Error::Error;
};

// Certainty equivalents being combined disagree on risk aversion or market.
struct MixedProvenance : Error {
  using Error::Error;
};

// Exponential-utility values must be strictly negative.
struct NonNegativeUtility : Error {
  using Error::Error;
};

// Risk report requested on an empty sample.
struct EmptySample : Error {
  using Error::Error;
};

// Config file could not be parsed or failed validation.
struct ConfigError : Error {
  using Error::Error;
};

// Filesystem failure while reading or writing artifacts.
struct IoError : Error {
  using Error::Error;
};

// Requested feature exists in the interface but has no implementation for
// the given inputs (e.g. closed-form hedge of a custom payoff).
struct NotImplemented : Error {
  using Error::Error;
};

}  // namespace exphedge

#pragma once

#include <stdexcept>
#include <string>

namespace deepex {

/// Invalid sizes, hyperparameters or config files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector or matrix dimensions that do not line up.
class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An API was called in a state where the call makes no sense (stale cache,
/// unset epistemic index, index kind that does not match the network).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// NaN or infinity showed up in a loss, gradient or update.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An environment was driven with an action its constraint function forbids.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed or inconsistent input artifacts (CSV schemas, rosters, checkpoints).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace deepex

#pragma once

#include <stdexcept>
#include <string>

namespace ews {

/// Invalid argument to a library call (bad parameter, dimension mismatch).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A multi-index with every component zero: the drift never reaches zero,
/// so there is no bifurcation and the variance stays bounded.
class NoBifurcation : public ArgumentError {
 public:
  NoBifurcation() : ArgumentError("no bifurcation: multi-index has no positive component") {}
};

/// Inconsistent simulation or run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Regression failed (singular design, too few points).
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data such as CSV rows or JSON documents.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine could not meet its tolerance within its budget.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ews

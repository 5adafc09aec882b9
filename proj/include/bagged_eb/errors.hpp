#pragma once

#include <stdexcept>
#include <string>

namespace beb {

/// Malformed or inconsistent user input (files, configs, parameter values).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A model fit could not produce an estimate (singular design, degenerate
/// data, iteration cap).
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite objective values or a bootstrap ensemble with no usable replicate.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace beb

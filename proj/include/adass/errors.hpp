#pragma once

#include <stdexcept>
#include <string>

namespace adass {

// Invalid distribution/model parameter (bad hyperparameter, out-of-range index).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or missing user input: files, CSV cells, dimension mismatches.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure: decomposition breakdown, estimator with no admissible index.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operation invoked on a state that does not support it (e.g. mode mismatch).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace adass

#pragma once

#include <stdexcept>
#include <string>

namespace tsbi {

/// Malformed or physically inconsistent input (scenario, parameters, ranges).
class InputError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Numerical failure that is not a plain non-convergence (singular system,
/// non-bracketable root, unstable integration).
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A post-solve physical check failed (energy audit, negative loss).
class InvariantError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// File could not be read or written.
class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace tsbi

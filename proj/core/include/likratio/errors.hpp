#pragma once

#include <stdexcept>
#include <string>

namespace likratio {

/// Raised for malformed arguments: non-positive sizes, dimension mismatches,
/// non-SPD covariances.
using InvalidArgument = std::invalid_argument;

/// Raised when an input is well formed but not handled by the routine
/// (e.g. an initial condition without a closed-form solution).
class UnsupportedInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace likratio

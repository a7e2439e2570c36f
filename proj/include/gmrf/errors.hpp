#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gmrf {

// Operand dimensions disagree.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// An operator that must be symmetric positive definite is not.  `index`
// points at the offending eigenvalue, pivot, or row when known, -1 otherwise.
struct NotSpdError : std::runtime_error {
  explicit NotSpdError(const std::string& what, std::int64_t index = -1)
      : std::runtime_error(what), index(index) {}
  std::int64_t index;
};

// A numeric guard tripped: non-finite input, FFT imaginary residue above
// tolerance, or an overflow guard.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A preconditioner was asked for a capability it does not advertise.
struct CapabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input file.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace gmrf

#pragma once

#include <stdexcept>
#include <string>

namespace ecl {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A new design point fell within the duplicate tolerance of an existing one.
struct DuplicatePointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Every remaining candidate duplicates the current design.
struct AcquisitionExhaustedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The simulator returned a non-finite response; message carries the input.
struct SimulatorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ecl

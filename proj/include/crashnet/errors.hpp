#pragma once

#include <stdexcept>

namespace crashnet {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid configuration or arguments (CLI exit code 2).
struct ConfigError : Error {
  using Error::Error;
};

// Malformed or insufficient input data (CLI exit code 3).
struct DataError : Error {
  using Error::Error;
};

// Numerical failure during computation (CLI exit code 4).
struct NumericError : Error {
  using Error::Error;
};

// Sifting cannot continue: an envelope has fewer than two support points
// even after boundary extension.
struct NotEnoughExtrema : NumericError {
  using NumericError::NumericError;
};

// No energy spike rose above the detection threshold.
struct NoCrashDetected : DataError {
  using DataError::DataError;
};

// An energy spike exists but prices do not fall across it.
struct NotACrash : DataError {
  using DataError::DataError;
};

// Correlation matrix could not be inverted even after shrinkage escalation.
struct SingularCorrelation : NumericError {
  using NumericError::NumericError;
};

}  // namespace crashnet

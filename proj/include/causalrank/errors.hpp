#pragma once

#include <stdexcept>
#include <string>

namespace causalrank {

// Base class for everything thrown by this library. ConfigError and its
// descendants map to CLI exit code 2, all other errors to exit code 1.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid configuration: bad parameter values, unknown config keys,
// infeasible parameter combinations.
struct ConfigError : Error {
  using Error::Error;
};

// Joint cluster state space too large for the assignment DP.
struct CapacityError : ConfigError {
  using ConfigError::ConfigError;
};

// Malformed or inconsistent input data (schema, parse, alignment).
struct DataError : Error {
  using Error::Error;
};

// A matrix required to be positive definite is not.
struct DefinitenessError : Error {
  using Error::Error;
};

// An operation was invoked before the pipeline state it needs exists
// (e.g. ranking without a stored profile).
struct StateError : Error {
  using Error::Error;
};

}  // namespace causalrank

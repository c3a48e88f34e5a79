#pragma once

#include <stdexcept>
#include <string>

namespace frameshed {

// Base class for all errors raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input data: bad histograms, unsorted streams, out-of-range
// arguments. Maps to CLI exit code 2.
struct InputError : Error {
  using Error::Error;
};

// Inconsistent configuration: grid/quantization mismatches, unknown colors,
// invalid bounds. Maps to CLI exit code 2.
struct ConfigError : Error {
  using Error::Error;
};

// Training preconditions not met (e.g. no positive examples for a color).
struct TrainingError : Error {
  using Error::Error;
};

}  // namespace frameshed

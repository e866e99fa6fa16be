#pragma once

#include <stdexcept>
#include <string>

namespace sag {

// Error taxonomy maps onto the CLI exit codes: config=2, data=3, numeric=4.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct DataError : Error {
  using Error::Error;
};

struct ParseError : DataError {
  using DataError::DataError;
};

struct NumericError : Error {
  using Error::Error;
};

}  // namespace sag

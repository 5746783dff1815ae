#pragma once

#include <stdexcept>
#include <string>

namespace alpha {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// bad config file or invalid parameter combination
struct ConfigError : Error {
  using Error::Error;
};

// filesystem / serialization failures
struct IoError : Error {
  using Error::Error;
};

// corrupt or incompatible checkpoint file
struct CheckpointError : Error {
  using Error::Error;
};

// non-finite values where finite math was required
struct NumericError : Error {
  using Error::Error;
};

}  // namespace alpha

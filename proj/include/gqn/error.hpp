#pragma once

#include <stdexcept>
#include <string>

namespace gqn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed data handed to an operation (empty sets, non-finite values).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Tensor or feature widths that do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A configuration that cannot be realised (K >= N, bad ratios, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A caller broke an operation's precondition (zero edges, nondeterminism).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Non-finite numbers appeared during a computation.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace gqn

#pragma once

#include <stdexcept>
#include <string>

namespace flbo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent user input (bad files, wrong lengths, non-finite values).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration values (counts out of range, bad sample sizes).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: singular systems, non-convergence.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace flbo

#pragma once

#include <stdexcept>
#include <string>

namespace nepstab {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A combinatorial size guard was exceeded.
class GuardError : public Error {
 public:
  using Error::Error;
};

/// A numerical kernel failed (for example the simplex iteration cap).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace nepstab

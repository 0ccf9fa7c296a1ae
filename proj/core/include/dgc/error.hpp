#pragma once

#include <stdexcept>
#include <string>

namespace dgc {

// Base class for every error raised by the library. The CLI maps the
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments or configuration (exit code 1).
class UsageError : public Error {
 public:
  using Error::Error;
};

// Shape or layout contract violated by the caller.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Missing, unreadable or malformed input data (exit code 2).
class DataError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf produced, singular systems, divergence (exit code 3).
class NumericalError : public Error {
 public:
  using Error::Error;
};

[[noreturn]] void throw_shape(const std::string& what);

}  // namespace dgc

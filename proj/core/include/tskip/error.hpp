#pragma once

#include <stdexcept>
#include <string>

namespace tskip {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes that cannot be combined by the requested operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// NaN or Inf produced or consumed where finite values are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Malformed input text (event files, specs, manifests).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// An architecture or configuration that violates its invariants.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Training loss became non-finite.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace tskip

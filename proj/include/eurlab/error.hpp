#pragma once

#include <stdexcept>
#include <string>

namespace eurlab {

// Base for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes disagree (POVM elements of different dimension, etc.).
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// A precondition on an input value was violated.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// A numerical procedure could not produce a trustworthy answer.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace eurlab

#pragma once

#include <stdexcept>
#include <string>

namespace phprior {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Rational density whose integral over (0, inf) diverges.
class IntegrabilityError : public Error {
 public:
  using Error::Error;
};

class MomentDoesNotExist : public Error {
 public:
  using Error::Error;
};

// Two denominator roots coincide where the closed form assumes simple poles.
class PoleCollision : public Error {
 public:
  using Error::Error;
};

// Pole of order > 2: the residue expansion does not cover it.
class HighOrderPole : public Error {
 public:
  using Error::Error;
};

class SizeBudgetExceeded : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace phprior

#pragma once

#include <stdexcept>
#include <string>

namespace lowlying {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the documented domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Evaluation at (or numerically on top of) a pole.
class PoleError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Operation requested outside the asymptotic regime it is stated for.
class RegimeError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Input size above a hard capacity cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// An intermediate would overflow binary64.
class OverflowError : public Error {
 public:
  using Error::Error;
};

// A series or quadrature failed to meet its stopping rule.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Residue constants did not reproduce the quadrature route.
class CalibrationError : public Error {
 public:
  using Error::Error;
};

// A truncation tail could not be pushed under the requested tolerance.
class BudgetError : public Error {
 public:
  using Error::Error;
};

// Requested work exceeds a hard cost guard.
class CostGuardError : public Error {
 public:
  using Error::Error;
};

// Malformed input file.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Two records share a spectral parameter.
class DuplicateError : public ParseError {
 public:
  using ParseError::ParseError;
};

// A numerical identity check failed.
class VerificationError : public Error {
 public:
  using Error::Error;
};

}  // namespace lowlying

#pragma once

#include <stdexcept>
#include <string>

namespace boxcouple {

/// Base class of every error the library raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

/// Malformed input or a violated precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "validation"; }
};

/// An enumeration or search ran past its configured budget.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "budget"; }
};

/// A stage cannot proceed (empty map space, no liftable level, ...).
class InfeasibleStage : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "infeasible"; }
};

}  // namespace boxcouple

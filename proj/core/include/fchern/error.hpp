#pragma once

#include <stdexcept>
#include <string>

namespace fchern {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition on an argument did not hold.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine failed to deliver its accuracy contract.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Propagation hit its step budget before reaching the requested tolerance.
class AccuracyError : public NumericalError {
 public:
  AccuracyError(const std::string& what, double achieved)
      : NumericalError(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

class InvalidModelError : public Error {
 public:
  using Error::Error;
};

class TrackingError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegeneracyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Lattice (plaquette) evaluation violated admissibility or hit a closed gap.
class GridError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace fchern

#pragma once

#include <stdexcept>
#include <string>

namespace neumann {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A size or count is outside its allowed range (mesh depth, grid size, ...).
class SizeError : public Error {
 public:
  using Error::Error;
};

/// Invalid geometric parameters (degenerate torus, zero-area triangle, ...).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// A scalar argument is outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Inputs that do not fit together (field on another mesh, length mismatch).
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// The constraint set of a projection is empty.
class FeasibilityError : public Error {
 public:
  using Error::Error;
};

/// The eigenpair handed to a sensitivity routine does not solve the system.
class StaleEigenpairError : public Error {
 public:
  using Error::Error;
};

/// An assembled operator violates its contract (e.g. indefinite mass matrix).
class AssemblyContractError : public Error {
 public:
  using Error::Error;
};

/// Linear solve or factorization failure.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file; the message names the offending line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace neumann

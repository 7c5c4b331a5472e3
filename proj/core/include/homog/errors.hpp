#pragma once

#include <stdexcept>
#include <string>

namespace homog {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument passed to a library function (wrong direction index, mismatched sizes, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Geometry description could not be turned into a valid unit cell.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Configuration file problems. `line` is 0 when the problem is not tied to a line.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// An iterative or nonlinear solver failed to reach its tolerance.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// A linear subsystem has a component that no boundary condition pins down.
class SingularSystemError : public Error {
 public:
  explicit SingularSystemError(const std::string& equation)
      : Error("singular linear subsystem in the " + equation + " equation"), equation_(equation) {}
  const std::string& equation() const noexcept { return equation_; }

 private:
  std::string equation_;
};

/// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace homog

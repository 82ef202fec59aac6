#pragma once

#include <stdexcept>
#include <string>

namespace sae {

// Exit codes used by the command-line front-end.
enum class ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kData = 3,
  kNumerical = 4,
  kInfeasible = 5,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept { return ExitCode::kData; }
};

// Mismatched vector lengths or matrix shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Argument outside the domain of an operation (empty input, k too large, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A distribution specification that is malformed or inconsistent with its bins.
class SpecError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kUsage; }
};

// A well-formed specification that no split can satisfy (e.g. fewer test samples than bins).
class InfeasibleError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kInfeasible; }
};

class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, long iteration)
      : Error(what + " (iteration " + std::to_string(iteration) + ")"), iteration_(iteration) {}
  long iteration() const noexcept { return iteration_; }
  ExitCode exit_code() const noexcept override { return ExitCode::kNumerical; }

 private:
  long iteration_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& source, long line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

// Files that are individually valid but disagree with each other.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kUsage; }
};

// R^2 requested on targets with zero variance.
class UndefinedR2Error : public DomainError {
 public:
  using DomainError::DomainError;
};

}  // namespace sae

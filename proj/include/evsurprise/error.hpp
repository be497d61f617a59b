#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace evsurprise {

// Base of every error raised by the library. The CLI maps each subclass to a
// distinct exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A parameter or input lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A marginal column has no spread, so ranks carry no information.
class DegenerateMarginError : public DomainError {
 public:
  DegenerateMarginError(std::size_t column, const std::string& what)
      : DomainError(what), column_(column) {}
  [[nodiscard]] std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

// The caller combined arguments in a way the operation does not support.
class UsageError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public UsageError {
 public:
  using UsageError::UsageError;
};

// Root finding, quadrature or sampling failed to reach tolerance.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class FitError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class InitializationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DesignError : public DomainError {
 public:
  using DomainError::DomainError;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  [[nodiscard]] std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Every candidate was skipped, or nothing qualified.
class EmptyResultError : public Error {
 public:
  using Error::Error;
};

}  // namespace evsurprise

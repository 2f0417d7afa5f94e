#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ldikit {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text; carries the 1-based line number of the offending line.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Inconsistent or degenerate data (empty vocabulary, shape mismatch, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine produced a non-finite value or failed to make progress.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace ldikit

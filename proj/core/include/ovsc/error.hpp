#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ovsc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (shape mismatch, value out of range).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// An input file could not be parsed. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : Error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent user configuration (e.g. min duration above max duration).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The duration-constrained decoder admits no path for the given input length.
class InfeasibleError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Every binarization in the sweep produced a zero eigengap.
class IndeterminateCountError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace ovsc

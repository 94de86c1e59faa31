#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace causalpsm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated an operation's precondition (bad argument, bad config).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Input data is malformed or cannot support the requested computation.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A row of an input file could not be decoded.
class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace causalpsm

#pragma once

#include <stdexcept>
#include <string>

namespace dynca {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A set operation received an atom or pair where a set was required.
class TypeError : public Error {
 public:
  using Error::Error;
};

/// choose() on an empty set.
class EmptyChoice : public Error {
 public:
  using Error::Error;
};

/// A value exceeded the configured depth/width limits.
class LimitError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line, int column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace dynca

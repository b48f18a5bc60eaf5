#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace flattri {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression or system file. `line` is 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(format(what, line, column)), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t line, std::size_t column) {
    if (line == 0) return what + " (column " + std::to_string(column) + ")";
    return what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")";
  }

  std::size_t line_;
  std::size_t column_;
};

class UndeclaredIdentifier : public ParseError {
 public:
  UndeclaredIdentifier(const std::string& name, std::size_t line, std::size_t column)
      : ParseError("undeclared identifier '" + name + "'", line, column), name_(name) {}

  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

/// An expression hit a pole (or left the domain of ln) at the evaluation point.
class DivisionByZero : public Error {
 public:
  using Error::Error;
};

/// The probabilistic engine could not reach a verdict (every sample hit a pole).
class CannotDecide : public Error {
 public:
  using Error::Error;
};

class NotInvertible : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace flattri

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nushu {

// Input data violates a domain rule (script block, length invariant, ...).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A file does not follow its line format. Carries the 1-based line number.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : ValidationError(file + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Caller passed arguments outside an operation's precondition.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Object is not in a state that permits the operation.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace nushu

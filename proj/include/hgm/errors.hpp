#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hgm {

// Out-of-domain numeric argument or invalid configuration value.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Caller violated an operation's precondition (unknown id, double evaluation, ...).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Exhaustive computation would exceed its configured limit.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace hgm

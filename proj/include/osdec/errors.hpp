#pragma once

#include <stdexcept>
#include <string>

namespace osdec {

// Thrown when a caller violates an operation's preconditions (bad shapes,
// non-finite data, out-of-range parameters).
class InvalidInput : public std::invalid_argument {
 public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

// Thrown when an iterative numeric routine fails to converge or produces
// non-finite intermediate results.
class NumericFailure : public std::runtime_error {
 public:
  explicit NumericFailure(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when an internal consistency check fails. Indicates a bug, not bad
// user input.
class InternalError : public std::logic_error {
 public:
  explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

// File and stream I/O failures, with path context in the message.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed config or CSV input, with line/column context in the message.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace osdec

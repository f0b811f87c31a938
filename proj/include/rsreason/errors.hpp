#pragma once

#include <stdexcept>
#include <string>

namespace rsreason {

// Raised when an operation's precondition on its arguments is violated.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised by invert_answer for free-text answers.
class NotInvertible : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Transport-level failure talking to a chat backend.
class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rsreason

#pragma once

#include <stdexcept>
#include <string>

namespace undertrans {

/// Input that violates a structural requirement (malformed source, bad spec).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a scorer is queried or advanced past a zero-probability prefix.
class DeadPrefixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace undertrans

#pragma once

#include <stdexcept>
#include <string>

namespace pkrect {

/// Precondition or validation failure on caller-supplied data.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The brute-force oracle refuses instances whose search space exceeds its cap.
class InstanceTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

}  // namespace pkrect

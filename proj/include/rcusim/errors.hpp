#pragma once

#include <stdexcept>
#include <string>

namespace rcusim {

/// Bad configuration or arguments, detected before any run starts.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A structural invariant of the RCU records does not hold.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The modeled program did something the kernel model forbids (context switch
/// inside a read-side critical section, unbalanced unlock, foreign release, ...).
/// Aborts the current run.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rcusim

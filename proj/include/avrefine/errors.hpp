#pragma once

#include <stdexcept>
#include <string>

namespace avr {

// Bad or unreadable input data (files, dimensions, formats).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or infeasible generation spec.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace avr

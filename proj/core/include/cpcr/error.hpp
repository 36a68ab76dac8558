#pragma once

#include <stdexcept>
#include <string>

namespace cpcr {

// Bad or inconsistent input data: malformed files, values out of range,
// geometry that does not match a configuration.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller violated an operation's precondition (sizes, ranges, options).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace cpcr

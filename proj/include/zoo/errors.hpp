#pragma once

#include <stdexcept>
#include <string>

namespace zoo {

// Bad parameters or configuration. The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input data that cannot support the requested computation. Exit code 3.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace zoo

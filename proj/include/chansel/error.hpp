#pragma once

#include <stdexcept>
#include <string>

namespace chansel {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Violated precondition, malformed input data or an invalid parameter.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure or any other problem outside the caller's inputs.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace chansel

#pragma once

#include <stdexcept>
#include <string>

namespace md {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not conform to a primitive's contract.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or precondition violation on user-supplied settings.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Non-finite values during training.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace md

#pragma once

#include <stdexcept>
#include <string>

namespace cvpyr {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input: bad files, invalid parameters, violated
/// preconditions. The CLI maps this to exit code 1.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A computation could not produce a meaningful result (degenerate geometry,
/// too many invalid pixels). The CLI maps this to exit code 2.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace cvpyr

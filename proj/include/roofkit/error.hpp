#pragma once

#include <stdexcept>
#include <string>

namespace roofkit {

// Base of every error the library throws. The kind() string is stable and
// used by the CLI in its machine-readable error objects.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

// A caller-supplied value violates an operation's precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "validation"; }
};

// A file exists but its bytes do not follow the expected layout.
class FormatError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "format"; }
};

// A well-formed file uses a feature we do not read (Fortran order, dtype).
class UnsupportedError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "unsupported"; }
};

class IoError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "io"; }
};

}  // namespace roofkit

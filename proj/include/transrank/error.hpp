#pragma once

#include <stdexcept>
#include <string>

namespace transrank {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input is not a TRDF container, or uses an unsupported version.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Reading or writing bytes failed (missing file, truncated stream).
class IoError : public Error {
 public:
  using Error::Error;
};

/// Data violates a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Options are inconsistent with each other or with the data.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace transrank

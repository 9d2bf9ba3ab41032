#pragma once

#include <stdexcept>
#include <string>

namespace findret {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A file could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Input text or bytes do not follow the expected format.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that violates a domain invariant (duplicate ids, bad
// parameters, missing state for a scheme, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace findret

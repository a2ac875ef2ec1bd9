#pragma once

#include <stdexcept>
#include <string>

namespace spectrascreen {

// Every failure raised by the library derives from Error so callers (the CLI
// in particular) can map a whole family to one exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input that cannot be parsed at all (bad header, wrong ordering of the grid).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Well-formed input whose values violate a domain rule.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// The caller broke an operation's precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class SingularityError : public Error {
 public:
  using Error::Error;
};

// A numerical quantity collapsed to zero where a division needs it.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace spectrascreen

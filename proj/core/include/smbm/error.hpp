#pragma once

#include <stdexcept>
#include <string>

namespace smbm {

// Base of every error raised by the library. CLI maps these to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A parameter or input violates a documented precondition.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

// Argument lies outside the domain where a model is defined (e.g. v_g <= v_t).
class DomainError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// A numerical fit or factorization could not produce a usable result.
class FitFailure : public Error {
 public:
  using Error::Error;
};

// Malformed external input (CSV, JSON). Carries the offending line when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, long line = -1)
      : Error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

}  // namespace smbm

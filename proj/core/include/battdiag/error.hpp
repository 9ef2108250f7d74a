#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace battdiag {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A domain invariant does not hold. `invariant()` names the violated rule.
class ValidationError : public Error {
 public:
  ValidationError(std::string invariant, const std::string& detail)
      : Error(invariant + ": " + detail), invariant_(std::move(invariant)) {}

  const std::string& invariant() const noexcept { return invariant_; }

 private:
  std::string invariant_;
};

// Input text (CSV, JSON, completion) could not be parsed.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Bad configuration: missing files, inconsistent options.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace battdiag

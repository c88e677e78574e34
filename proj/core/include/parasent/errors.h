#pragma once

#include <stdexcept>
#include <string>

namespace parasent {

// Base for every error raised by the library. The CLI maps subclasses to
// exit codes (format/config -> 2, numerical -> 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Cosine or normalisation requested on a zero-norm vector.
class DegenerateVectorError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
  FormatError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_ = 0;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss or gradient, failed gradient check.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace parasent

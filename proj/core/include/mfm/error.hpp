#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mfm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. Carries the 1-based line number when known (0 otherwise).
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
        source_(source),
        line_(line) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

/// Input that parsed but violates a contract (unknown label, duplicate id, bad range).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Endpoint rejected our credentials; batch runs abort on this.
class AuthError : public Error {
 public:
  using Error::Error;
};

}  // namespace mfm

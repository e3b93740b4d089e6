#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace koalition {

/// Base error. `code()` is a short machine-readable tag ("oversum",
/// "no-polls", ...) that the CLI forwards verbatim.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

/// Problem with input data. `line()` is 1-based, 0 when not tied to a line.
class DataError : public Error {
 public:
  DataError(std::string code, const std::string& message, int line = 0)
      : Error(std::move(code), message), line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace koalition

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ccmp {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters (rejected at construction or at the call boundary).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An intermediate scale left the representable range.
class OutOfRange : public Error {
 public:
  using Error::Error;
};

/// A limit or an iteration grew without bound.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// The functional has no mountain-pass geometry (sup F <= 0, psi <= 0 along every probe).
class NoMountainError : public Error {
 public:
  using Error::Error;
};

/// The shooting bracket does not straddle the decay/blow-up dichotomy.
class BracketError : public Error {
 public:
  using Error::Error;
};

/// Scenario configuration error. Carries the 1-based line number when known (0 otherwise).
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace ccmp

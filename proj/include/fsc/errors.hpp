// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace fsc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file; carries the 1-based line number (0 when unknown).
class ParseError : public Error {
public:
  ParseError(const std::string &what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

class ValidationError : public Error {
public:
  using Error::Error;
};

class UnsupportedDimensionError : public Error {
public:
  using Error::Error;
};

class InvalidSpecError : public Error {
public:
  using Error::Error;
};

class DomainError : public Error {
public:
  using Error::Error;
};

class UnderDeterminedError : public Error {
public:
  using Error::Error;
};

class UnsupportedNormError : public Error {
public:
  using Error::Error;
};

/// Raised when the attacker is asked to match with a derivative order that
/// is not robust to an unknown constant offset.
class ThreatModelError : public Error {
public:
  using Error::Error;
};

/// No clustering with at most K clusters separates every cannot-link pair.
class InfeasibleError : public Error {
public:
  InfeasibleError(const std::string &what, std::size_t first,
                  std::size_t second)
      : Error(what), first_(first), second_(second) {}
  std::size_t first() const { return first_; }
  std::size_t second() const { return second_; }

private:
  std::size_t first_;
  std::size_t second_;
};

} // namespace fsc

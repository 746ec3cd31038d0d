#pragma once

#include <stdexcept>
#include <string>

namespace dream {

// Base for all library failures. Subclasses exist so the CLI can map
// configuration mistakes to a distinct exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input data (corpus lines, SemEval records, model files).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or unusable paths; detected before any work runs.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Oracle transport, cache-miss, or fixture-lookup failures.
class OracleError : public Error {
 public:
  using Error::Error;
};

}  // namespace dream

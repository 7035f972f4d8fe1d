#pragma once

#include <stdexcept>
#include <string>

namespace tmem {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A NaN or infinity reached a computation that requires finite input.
class NumericDomainError : public Error {
 public:
  using Error::Error;
};

/// A parameter violates its documented invariant (dt <= 0, k_pos == 0, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Gain synthesis is impossible for the given plant (unreachable channels).
class SynthesisError : public Error {
 public:
  using Error::Error;
};

/// Scenario text could not be parsed or validated. Always names the key.
class ParseError : public Error {
 public:
  ParseError(std::string key, const std::string& what)
      : Error(key + ": " + what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// The simulation produced a non-finite state and was stopped.
class SimulationAbort : public Error {
 public:
  SimulationAbort(const std::string& what, std::string diagnostics)
      : Error(what), diagnostics_(std::move(diagnostics)) {}

  const std::string& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::string diagnostics_;
};

}  // namespace tmem

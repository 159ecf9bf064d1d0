#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace rqbc {

// Base for every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid configuration value. `field()` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// A one-time pad ran out of unconsumed key material.
struct PadExhausted : Error {
  using Error::Error;
};

// Wire payload does not follow the outcome-report framing.
struct MalformedPayload : Error {
  using Error::Error;
};

// Requested completeness target cannot be met at any grid threshold.
struct InfeasibleTarget : Error {
  using Error::Error;
};

// Simulation could not proceed (unknown agent, unhandled delivery).
struct RunFailure : Error {
  using Error::Error;
};

}  // namespace rqbc

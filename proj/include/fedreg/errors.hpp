#pragma once

#include <stdexcept>
#include <string>

namespace fedreg {

// Invalid configuration: shape mismatches, bad hyperparameters, malformed config files.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad or unusable data: empty inputs, corrupt corpus files, all-infeasible shards.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Violations of the federation protocol: bad aggregation weights, missing client reports.
class ProtocolError : public std::runtime_error {
 public:
  explicit ProtocolError(const std::string& msg) : std::runtime_error(msg) {}
};

// Caller bugs, not user input.
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace fedreg

#pragma once

#include <stdexcept>
#include <string>

namespace adhrl {

// Caller broke an API precondition (bad dimensions, invalid ids, ...).
struct ContractViolation : std::logic_error {
  explicit ContractViolation(const std::string& msg) : std::logic_error(msg) {}
};

// Bad or inconsistent configuration / input files.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// NaN/Inf showed up where finite numbers are required.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Asked for more data than a buffer currently holds.
struct InsufficientData : std::runtime_error {
  explicit InsufficientData(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem / serialization failures (missing files, corrupt checkpoints, ...).
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace adhrl

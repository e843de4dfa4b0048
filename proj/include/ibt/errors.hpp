#pragma once

#include <stdexcept>
#include <string>

namespace ibt {

// Argument and domain violations use std::invalid_argument / std::domain_error.
// The two types below carry the CLI exit-code distinctions.

/// Invalid or inconsistent run configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Propagation left its stability envelope (CLI exit code 3).
class NumericalInstability : public std::runtime_error {
 public:
  explicit NumericalInstability(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ibt

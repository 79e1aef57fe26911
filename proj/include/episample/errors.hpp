#pragma once

#include <stdexcept>
#include <string>

namespace episample {

/// Bad or inconsistent configuration values.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A caller violated a documented precondition (wrong day index,
/// over-budget test request, unknown id, ...).
struct ContractError : std::logic_error {
    explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

/// Population synthesis could not satisfy its constraints
/// (for example more households requested than available).
struct GenerationError : std::runtime_error {
    explicit GenerationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// File read/write/parse failures.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace episample

#pragma once

#include <stdexcept>
#include <string>

namespace parksia {

/// Invalid user-supplied parameters (grid, demand, scenario, CLI).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error("config: " + what) {}
};

/// Broken internal invariant. Never expected on valid inputs.
class InternalError : public std::logic_error {
public:
    explicit InternalError(const std::string& what) : std::logic_error("internal: " + what) {}
};

}  // namespace parksia

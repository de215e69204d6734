#pragma once

#include <stdexcept>
#include <string>

namespace otrm {

// Invalid configuration or malformed input (CLI exit code 2).
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A resource guard refused the problem size (CLI exit code 3).
struct guard_error : std::runtime_error {
    explicit guard_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure: non-finite values, no convergence (CLI exit code 4).
struct numerical_error : std::runtime_error {
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace otrm

#pragma once

#include <stdexcept>
#include <string>

namespace rydgauge {

// Invalid or inconsistent user configuration.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A numerical contract was violated (degeneracy, norm drift, grid validity).
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rydgauge

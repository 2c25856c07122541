#pragma once

#include <stdexcept>
#include <string>

namespace codedq {

// Bad user-supplied configuration or arguments.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Arrival rates outside the relevant capacity region.
struct InfeasibleError : std::runtime_error {
    explicit InfeasibleError(const std::string& msg) : std::runtime_error(msg) {}
};

// Simulation aborted on the occupancy cap.
struct UnstableError : std::runtime_error {
    explicit UnstableError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace codedq

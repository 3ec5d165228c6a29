#pragma once

#include <stdexcept>
#include <string>

namespace atlaslab {

// Error taxonomy shared by all modules. Every condition a caller can trip by
// passing bad values gets its own type so tests and the CLI can distinguish
// "your input is wrong" (exit 1) from "a verification check failed" (exit 2).

struct DomainError : std::invalid_argument {
    explicit DomainError(const std::string& msg) : std::invalid_argument(msg) {}
};

struct NonpositiveRate : DomainError {
    explicit NonpositiveRate(const std::string& msg) : DomainError(msg) {}
};

struct GeometryError : DomainError {
    explicit GeometryError(const std::string& msg) : DomainError(msg) {}
};

struct DegenerateDirection : GeometryError {
    explicit DegenerateDirection(const std::string& msg) : GeometryError(msg) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct InsufficientData : std::runtime_error {
    explicit InsufficientData(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace atlaslab

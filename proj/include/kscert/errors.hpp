#pragma once

#include <stdexcept>
#include <string>

namespace kscert {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& w) : std::runtime_error(w) {}
};

struct CflError : std::runtime_error {
    explicit CflError(const std::string& w) : std::runtime_error(w) {}
};

struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& w) : std::runtime_error(w) {}
};

}  // namespace kscert

#pragma once

#include <stdexcept>
#include <string>

namespace tic {

// Bad user input: grid sizes, tolerances, unknown registry names, malformed configs.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure: divergence, NaN/Inf, non-convergent iterations.
struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

// An iterate's derivative stack left the nonlinearity's domain ball; the
// extension loop treats this as the maximal-interval boundary exit.
struct DomainExitError : SolverError {
    explicit DomainExitError(const std::string& msg) : SolverError(msg) {}
};

} // namespace tic

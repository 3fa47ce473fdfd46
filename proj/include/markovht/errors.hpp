#pragma once

#include <stdexcept>
#include <string>

namespace markovht {

/// Bad caller input: out-of-range values, malformed sequences, schema mismatches.
struct input_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// An iterative procedure ran out of budget; carries the last residual seen.
struct convergence_error : std::runtime_error {
    convergence_error(const std::string& what, double residual_)
        : std::runtime_error(what), residual(residual_) {}
    double residual;
};

/// Numerical breakdown: eigensolver failure, material imaginary parts, degenerate data.
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Inconsistent run configuration (e.g. a window time not covered by any law).
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace markovht

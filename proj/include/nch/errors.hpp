#pragma once

#include <stdexcept>
#include <string>

namespace nch {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid parameters, malformed configuration, unsupported option.
struct ConfigError : Error {
    using Error::Error;
};

// Field/grid dimension mismatch between operands.
struct ShapeError : Error {
    using Error::Error;
};

// Input violates a mathematical precondition (e.g. nonzero mean where a
// mean-zero field is required).
struct DomainError : Error {
    using Error::Error;
};

// Non-finite values or other numerical breakdown.
struct NumericError : Error {
    using Error::Error;
};

// Solution blow-up during time integration; carries the last valid time
// and the offending sup-norm.
struct DivergenceError : NumericError {
    DivergenceError(const std::string& msg, double t_, double linf_)
        : NumericError(msg), t(t_), linf(linf_) {}
    double t;
    double linf;
};

// I/O failures (missing file, truncated payload, malformed row).
struct IoError : Error {
    using Error::Error;
};

} // namespace nch

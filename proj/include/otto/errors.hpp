#ifndef OTTO_ERRORS_HPP
#define OTTO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace otto {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad parameters, schema violations, impossible layouts. CLI exit code 2.
struct ConfigError : Error {
    using Error::Error;
};

// Positivity loss, truncation overflow, non-convergence. CLI exit code 1.
struct NumericsError : Error {
    using Error::Error;
};

struct DimensionError : ConfigError {
    using ConfigError::ConfigError;
};

} // namespace otto

#endif

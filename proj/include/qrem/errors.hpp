#pragma once

#include <stdexcept>
#include <string>

namespace qrem {

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input: shape mismatches, broken invariants, bad arguments.
struct ValidationError : Error {
    using Error::Error;
};

/// Experiment data does not cover a required input configuration.
struct CoverageError : Error {
    using Error::Error;
};

/// A noise matrix is too ill-conditioned to invert reliably.
struct SingularModelError : Error {
    using Error::Error;
};

} // namespace qrem

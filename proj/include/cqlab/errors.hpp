#pragma once

#include <stdexcept>
#include <string>

namespace cqlab {

// Error taxonomy used across the library. Catch cqlab::Error to get all of them.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Caller passed something malformed (bad dimensions, non-stochastic rows, ...).
struct ArgumentError : Error {
    using Error::Error;
};

// The request is well formed but exceeds a configured budget (dimension cap, enumeration size).
struct ResourceError : Error {
    using Error::Error;
};

// A numerical invariant that should hold mathematically was violated at runtime.
struct NumericError : Error {
    using Error::Error;
};

// Query outside the domain of a partial map (e.g. a zero-probability sequence).
struct DomainError : Error {
    using Error::Error;
};

// Operation not defined for this variant (e.g. context-free outputs of a memoried channel).
struct UnsupportedError : Error {
    using Error::Error;
};

}  // namespace cqlab

#pragma once

#include <stdexcept>
#include <string>

namespace magging {

// Base class for everything thrown by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input, dimension mismatch, invalid configuration.
struct InputError : Error {
    using Error::Error;
};

// A per-group or pooled regression fit could not be computed.
struct EstimatorError : Error {
    using Error::Error;
};

// The simplex QP (or another inner solver) failed to certify a solution.
struct SolverError : Error {
    using Error::Error;
};

namespace detail {

inline void require(bool cond, const std::string& msg)
{
    if (!cond) throw InputError(msg);
}

} // namespace detail
} // namespace magging

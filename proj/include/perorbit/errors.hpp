#ifndef PERORBIT_ERRORS_HPP
#define PERORBIT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace perorbit {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A point fell outside the phase space / branch domains.
struct OutOfDomain : Error {
    using Error::Error;
};

// A map-only operation was applied to a subshift (or vice versa).
struct NotAMap : Error {
    using Error::Error;
};

// Derivative data requested where it does not exist (non-differentiable
// branch endpoint, or a subshift without per-symbol expansion weights).
struct DerivativeUnavailable : Error {
    using Error::Error;
};

// An iterative solver failed to reach its tolerance within its budget.
struct NoConvergence : Error {
    using Error::Error;
};

// An enumeration would visit more admissible words than allowed.
struct BudgetExceeded : Error {
    BudgetExceeded(const std::string& msg, unsigned long long count)
        : Error(msg), word_count(count) {}
    unsigned long long word_count;
};

// A transition matrix without a strongly connected admissible graph.
struct NotIrreducible : Error {
    using Error::Error;
};

// A constrained optimization target outside the achievable range.
struct TargetUnachievable : Error {
    using Error::Error;
};

// A normalized measure was requested over an empty atom set.
struct EmptySetError : Error {
    using Error::Error;
};

// No exact reference computation exists for the requested combination.
struct OracleUnavailable : Error {
    using Error::Error;
};

// Malformed system/potential/config data.
struct InvalidSpec : Error {
    using Error::Error;
};

}  // namespace perorbit

#endif  // PERORBIT_ERRORS_HPP

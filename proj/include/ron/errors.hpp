#pragma once

#include <stdexcept>
#include <string>

namespace ron {

// Ill-conditioned factorization, non-finite values, and similar failures that
// abort a solver step but leave earlier iterations usable.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Exponent-range violation in an objective evaluation.
struct OverflowError : NumericalError {
    using NumericalError::NumericalError;
};

// Sinkhorn scaling hit a zero kernel mass for a positive marginal.
struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input file; message carries "path:line:" context.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid experiment configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ron

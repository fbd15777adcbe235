#pragma once

#include <stdexcept>
#include <string>

namespace safegrid {

/// Configuration or input-spec problem detected before a run starts.
/// The CLI maps this to exit code 2.
struct SpecError : std::runtime_error {
    explicit SpecError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Value iteration hit max_iter before the sup-norm tolerance.
struct NonConvergenceError : std::runtime_error {
    double residual;
    int iterations;
    NonConvergenceError(const std::string& msg, double res, int iters)
        : std::runtime_error(msg), residual(res), iterations(iters) {}
};

/// A goal state could not be reached inside the pessimistic safe set.
/// Should not occur when the returnability invariants hold.
struct DisconnectedSafeSetError : std::runtime_error {
    explicit DisconnectedSafeSetError(const std::string& msg)
        : std::runtime_error(msg) {}
};

/// Kernel matrix stayed non-positive-definite after the jitter ladder.
struct IllConditionedError : std::runtime_error {
    explicit IllConditionedError(const std::string& msg)
        : std::runtime_error(msg) {}
};

}  // namespace safegrid

#pragma once

#include <stdexcept>
#include <string>

namespace gsc {

/// Malformed input, inconsistent labels, or a violated precondition.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical procedure could not produce a trustworthy result
/// (singular or non-productive system, divergent series, non-convergence).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConvergenceError : public NumericalError {
public:
    ConvergenceError(const std::string& what, int iterations, double residual)
        : NumericalError(what), iterations_(iterations), residual_(residual) {}

    int iterations() const noexcept { return iterations_; }
    double last_residual() const noexcept { return residual_; }

private:
    int iterations_;
    double residual_;
};

}  // namespace gsc

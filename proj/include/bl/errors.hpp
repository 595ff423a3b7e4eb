#pragma once
#include <stdexcept>
#include <string>

namespace bl {

// Base for all solver-suite errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad argument or scenario field (maps to exit code 2 in the CLI).
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// An iterative solver failed to converge (maps to exit code 3).
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& msg, double last_residual = 0.0)
        : Error(msg), last_residual(last_residual) {}
    double last_residual;
};

// A converged result violates a qualitative requirement (positivity,
// monotonicity, bound of wrong sign).
class QualitativeError : public Error {
public:
    explicit QualitativeError(const std::string& msg) : Error(msg) {}
};

}  // namespace bl

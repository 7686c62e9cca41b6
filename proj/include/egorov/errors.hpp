#pragma once

#include <stdexcept>
#include <string>

namespace egorov {

/// Input outside the mathematical domain of an operation (non-unit vector, bad quadrature, wrong model mode).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Numerical failure: blow-up, non-convergence, CFL violation. Carries an optional best estimate.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what, double best_estimate = 0.0)
        : std::runtime_error(what), best_(best_estimate) {}
    double best_estimate() const { return best_; }

private:
    double best_;
};

/// Scaling fit could not be formed (too few points above the floor).
class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Config file or command-line problem; maps to exit code 2.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace egorov

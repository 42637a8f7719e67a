#pragma once

#include <stdexcept>
#include <string>

namespace gsig {

/// Bad shapes, out-of-range arguments, malformed configuration.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Non-finite values, blow-ups and convergence failures.
///
/// `step()` carries the recurrence / integrator step at which the problem
/// was detected, or -1 when the failure is not tied to a step.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what, long step = -1)
        : std::runtime_error(what), step_(step) {}

    long step() const noexcept { return step_; }

private:
    long step_;
};

} // namespace gsig

#pragma once

#include <stdexcept>
#include <string>

namespace sel {

// Bad user input: invalid parameters, malformed files, unknown options.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Requested object does not exist in this parameter regime.
class RegimeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NoSolutions : public RegimeError {
public:
    using RegimeError::RegimeError;
};

class FamilyUnavailable : public RegimeError {
public:
    using RegimeError::RegimeError;
};

class HypothesisViolation : public RegimeError {
public:
    HypothesisViolation(std::string family, std::string constraint)
        : RegimeError(family + ": hypothesis violated: " + constraint),
          family_(std::move(family)), constraint_(std::move(constraint)) {}
    const std::string& family() const noexcept { return family_; }
    const std::string& constraint() const noexcept { return constraint_; }

private:
    std::string family_;
    std::string constraint_;
};

// Integrator, bracketing or bisection failure.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace sel

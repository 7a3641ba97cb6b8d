#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dynq {

// Argument outside the documented domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A request that is well-formed but has no solution (e.g. idling up to a
// higher state).
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An iterative solver hit its iteration cap or missed its residual target.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A certificate was requested outside the hypotheses it is valid under.
class RefusedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Rounding drift beyond the clamp tolerance; indicates a bug, not bad input.
class InternalConsistencyError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class InvalidProfile : public std::invalid_argument {
public:
    explicit InvalidProfile(std::vector<std::string> violations);

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    std::vector<std::string> violations_;
};

}  // namespace dynq

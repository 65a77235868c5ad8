#pragma once

#include <stdexcept>
#include <string>

namespace radot {

/// Invalid user input: malformed specs, bad weights, dimension mismatch.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A mathematical precondition fails: divergent integral, non-normalizable
/// generator, infinite second moment.
class MathError : public std::runtime_error {
public:
    explicit MathError(const std::string& msg) : std::runtime_error(msg) {}
};

/// An iterative solver did not reach its tolerance within the iteration budget.
class ConvergenceError : public std::runtime_error {
public:
    explicit ConvergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace radot

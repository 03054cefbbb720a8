#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace semidl {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operands from different semiring instances.
class TypeMismatch : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
          line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Well-formed syntax that violates a program rule (arity, safety, target).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A solver or strategy was asked to run on a semiring lacking the capability.
class CapabilityError : public Error {
public:
    using Error::Error;
};

/// The grounding would exceed the configured size cap.
class CapExceeded : public Error {
public:
    using Error::Error;
};

/// strategy=acyclic on a rule whose body is cyclic.
class CyclicRule : public Error {
public:
    using Error::Error;
};

/// A grounding construction whose preconditions do not hold for a rule.
class StrategyNotApplicable : public Error {
public:
    using Error::Error;
};

} // namespace semidl

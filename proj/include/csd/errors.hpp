#pragma once

#include <stdexcept>
#include <string>

namespace csd {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file (CSV syntax, bad numbers); message carries the line number.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Column/schema mismatch: unknown column, duplicate name, missing target declaration.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// Input violates a value contract (e.g. non-binary target cell).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Dimension mismatch between operands.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Data is too degenerate to process: zero-variance column, single-class labels,
/// all-missing column, empty cohort, unbalanceable outcome.
class DegenerateDataError : public Error {
public:
    using Error::Error;
};

/// Iterative procedure failed to reach its target; carries the best value reached.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double best_value)
        : Error(what), best_value_(best_value) {}
    double best_value() const { return best_value_; }

private:
    double best_value_;
};

/// Two rank tables share too few variables to correlate.
class InsufficientOverlapError : public Error {
public:
    using Error::Error;
};

/// Estimate/truth graphs are not comparable (cmd_eval).
class EvalMismatchError : public Error {
public:
    using Error::Error;
};

} // namespace csd

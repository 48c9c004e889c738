#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mgrew {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnknownEdgeError : Error {
    using Error::Error;
};

/// remove_edge with forbid-if-referenced on an edge that still has referrers.
struct ReferencedError : Error {
    using Error::Error;
};

struct ParseError : Error {
    ParseError(std::size_t line, std::size_t column, const std::string& what)
        : Error("parse error at " + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
          line(line),
          column(column) {}

    std::size_t line;
    std::size_t column;
};

struct DuplicateKindError : Error {
    using Error::Error;
};

struct UnknownKindError : Error {
    using Error::Error;
};

struct NoMetricError : Error {
    using Error::Error;
};

/// transform with a template variable that is not a pattern variable.
struct TemplateVariableError : Error {
    using Error::Error;
};

struct RuleFormatError : Error {
    using Error::Error;
};

/// A homomorphism handed to apply_spo/apply_dpo failed re-validation.
struct InvalidMatchError : Error {
    using Error::Error;
};

struct EvalError : Error {
    EvalError(const std::string& what, std::string expr)
        : Error(what + ": " + expr), expression(std::move(expr)) {}

    std::string expression;  // text of the offending expression
};

struct FuelExhaustedError : EvalError {
    explicit FuelExhaustedError(std::string expr)
        : EvalError("fuel exhausted while evaluating", std::move(expr)) {}
};

struct GroundedFaultError : EvalError {
    GroundedFaultError(const std::string& what, std::string expr)
        : EvalError("grounded function fault (" + what + ")", std::move(expr)) {}
};

struct NotActivatedError : EvalError {
    explicit NotActivatedError(std::string expr)
        : EvalError("expression carries no @ activation mark", std::move(expr)) {}
};

}  // namespace mgrew

#pragma once

#include <mgrew/expression.hpp>
#include <mgrew/metagraph.hpp>

#include <optional>
#include <vector>

namespace mgrew {

/// Three-way outcome of checking an arrow-type application.
struct ApplicationCheck {
    enum class Status { Result, Undefined, TypeError };

    Status status;
    std::optional<Expression> result_type;  // set iff status == Result

    static ApplicationCheck result(Expression type) {
        return {Status::Result, std::move(type)};
    }
    static ApplicationCheck undefined() { return {Status::Undefined, std::nullopt}; }
    static ApplicationCheck type_error() { return {Status::TypeError, std::nullopt}; }
};

/// True for an edge of the shape (: subject type).
bool is_type_fact(const Metagraph& space, const Edge& edge);

/// All type expressions assigned to id by (: subject type) roots, in
/// ascending fact-root order, deduplicated. Empty means type-undefined.
std::vector<Expression> types_of(const Metagraph& space, EdgeId id);

/// Like types_of for an expression that may not be stored in the space.
std::vector<Expression> types_of_expression(const Metagraph& space, const Expression& expr);

/// Whether t1 < t2 in the derived inheritance preorder: the
/// reflexive-transitive closure of (: A B) facts in which both A and B are
/// declared types (declared = asserted (: X Type), with Type itself always
/// declared). Unknown types inherit only from themselves; cycles collapse to
/// mutual inheritance. The closure is recomputed lazily and invalidated by
/// any mutation of the space.
bool inherits(const Metagraph& space, const Expression& t1, const Expression& t2);

/// If fn has an arrow type (-> B A) and arg has some type B' with B' < B,
/// yields A. An arg with no type at all is Undefined, as is an fn without any
/// arrow type. An arg whose types all fail the inheritance test is TypeError.
/// Arrows with more than two operands curry left to right:
/// (-> A B C) applied once yields (-> B C). Arrows are tried in ascending
/// fact-root order and the first accepting one wins.
ApplicationCheck check_application(const Metagraph& space, EdgeId fn, EdgeId arg);

}  // namespace mgrew

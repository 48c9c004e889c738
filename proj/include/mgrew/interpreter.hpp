#pragma once

#include <mgrew/enrichments.hpp>
#include <mgrew/matcher.hpp>
#include <mgrew/metagraph.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mgrew {

class Interpreter;
struct EvalContext;

/// A grounded function: native code behind a name. Quoting entries receive
/// their arguments as literal expressions; others receive evaluated values.
struct GroundedFunction {
    using Impl =
        std::function<std::vector<Expression>(std::span<const Expression>, EvalContext&)>;

    Impl fn;
    bool quoting = false;
};

class GroundingRegistry {
public:
    /// Core entries: + - * / == (numbers), concat strlen (strings), and the
    /// quoting entries match, transform, quote.
    static GroundingRegistry core();

    void add(std::string name, GroundedFunction fn);
    const GroundedFunction* find(const std::string& name) const;
    bool contains(const std::string& name) const { return entries_.contains(name); }

private:
    std::map<std::string, GroundedFunction> entries_;
};

/// One pending or finished evaluation of a stored expression; the explicit
/// realization of the interpreter's evaluate-next bookkeeping. A done task's
/// results are immutable.
struct EvalTask {
    enum class Status { Pending, InProgress, Done };

    EdgeId target;
    Status status = Status::Pending;
    std::vector<Expression> results;
    std::int64_t fuel_remaining = 0;
};

enum class TraceKind { GroundedApply, Match, Transform, EqualityStep, TypeCheck };

std::string trace_kind_name(TraceKind kind);

/// One interpreter step. input and outputs are ids in the trace space; rule
/// is the (= L R) root used, in the evaluated space.
struct TraceEvent {
    std::size_t step;
    TraceKind kind;
    EdgeId input;
    std::optional<EdgeId> rule;
    Bindings bindings;
    std::vector<EdgeId> outputs;
};

/// Results plus the recorded trace. The trace space holds one
/// (step <n> <kind> <input> (<outputs>...)) root per event, so traces are
/// themselves matchable and rewritable data.
struct EvalOutcome {
    std::vector<Expression> results;
    std::vector<TraceEvent> trace;
    Metagraph trace_space;
};

struct EqualityAnswer {
    Bindings bindings;
    Expression rhs;  // right-hand side with the bindings applied
    EdgeId rule;     // the (= L R) root
};

/// Evaluates expressions over an immutable space snapshot.
///
/// Dispatch: (@ e) activations evaluate e; a registered head symbol in call
/// position applies its grounding (arguments evaluated first unless the
/// entry quotes, and type-checked against the head's declared arrow type);
/// otherwise the expression is an equality query, rewritten by every
/// (= L R) root whose left side unifies with it. An expression no equality
/// applies to either is a normal form (leaves evaluate to themselves, lists
/// normalize their children and retry). Results are set-valued with
/// deterministic ordering; recursion is bounded by fuel.
///
/// All intermediates land in a private scratch layer over the space. The
/// inhabited-type rule (= (: $t Type) (transform (: $w $t) True)) is
/// installed into that layer of every fresh interpreter. The base space must
/// stay frozen for the interpreter's lifetime; run one interpreter per
/// thread.
class Interpreter {
public:
    explicit Interpreter(const Metagraph& space,
                         GroundingRegistry registry = GroundingRegistry::core(),
                         EnrichmentRegistry enrichments = EnrichmentRegistry::with_builtins());

    std::vector<Expression> eval(const Expression& expr, std::int64_t fuel);

    /// eval that also records one TraceEvent per interpreter step.
    EvalOutcome run_with_trace(const Expression& expr, std::int64_t fuel);

    /// Pairs (bindings, instantiated rhs) for every (= L R) root whose left
    /// side unifies with expr, in root order. Directional: right-hand sides
    /// are never matched.
    std::vector<EqualityAnswer> equality_query(const Expression& expr) const;

    /// True iff any (: w type-expr) root exists — the inhabited-type rule
    /// evaluated directly: transform((: $w type), True) is non-empty.
    bool check_inhabited(const Expression& type_expr) const;

    /// Evaluates the @-marked expression at id: the edge must be (@ e).
    std::vector<Expression> activate(EdgeId id, std::int64_t fuel);

    /// The space as this interpreter sees it: base plus scratch layer.
    const Metagraph& view() const { return overlay_; }
    const GroundingRegistry& registry() const { return registry_; }
    const EnrichmentRegistry& enrichments() const { return enrichments_; }

private:
    friend struct EvalContext;
    struct EvalState;

    std::vector<Expression> eval_rec(const Expression& expr, EvalState& state);
    std::vector<Expression> apply_grounded(const Expression& expr, const std::string& name,
                                           const GroundedFunction& fn, EvalState& state);
    std::optional<std::vector<Expression>> type_check_call(const Expression& expr,
                                                           EvalState& state);
    void record(EvalState& state, TraceKind kind, const Expression& input,
                std::optional<EdgeId> rule, Bindings bindings,
                std::span<const Expression> outputs);

    const Metagraph& base_;
    Metagraph overlay_;
    GroundingRegistry registry_;
    EnrichmentRegistry enrichments_;
};

/// Execution context handed to grounded functions.
struct EvalContext {
    Interpreter& interpreter;
    Interpreter::EvalState& state;

    const Metagraph& view() const { return interpreter.view(); }
    std::vector<Expression> eval(const Expression& expr);  // shares the fuel budget
};

/// Trace export: one JSON object per line with fields
/// {step, kind, input, rule, bindings, outputs}, expression fields rendered
/// as S-expression text. `space` is the evaluated space (Interpreter::view).
std::string trace_to_json_lines(const EvalOutcome& outcome, const Metagraph& space);

}  // namespace mgrew

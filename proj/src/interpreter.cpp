#include <mgrew/interpreter.hpp>

#include <mgrew/errors.hpp>
#include <mgrew/reader.hpp>
#include <mgrew/types.hpp>

#include <json.hpp>

#include <charconv>
#include <set>

namespace mgrew {

namespace {

bool is_plain_symbol(const Expression& e, const char* name) {
    return e.is_leaf() && e.label().is_symbol() && e.label().name() == name;
}

bool is_arrow_type(const Expression& type) {
    return type.is_list() && type.size() >= 3 && is_plain_symbol(type.child(0), "->");
}

std::optional<long long> parse_integer(const std::string& text) {
    long long value = 0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return value;
}

std::optional<double> parse_double(const std::string& text) {
    double value = 0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) return std::nullopt;
    return value;
}

struct Number {
    bool integral;
    long long i;
    double d;

    double as_double() const { return integral ? static_cast<double>(i) : d; }
};

Number number_of(const Expression& e) {
    if (e.is_leaf() && e.label().is_symbol()) {
        const std::string& name = e.label().name();
        if (auto i = parse_integer(name)) return {true, *i, 0.0};
        if (auto d = parse_double(name)) return {false, 0, *d};
    }
    throw GroundedFaultError("not a number", e.to_text());
}

Expression number_expression(const Number& n) {
    char buffer[64];
    if (n.integral) {
        auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, n.i);
        return Expression::symbol(std::string(buffer, ptr));
    }
    auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, n.d);
    return Expression::symbol(std::string(buffer, ptr));
}

GroundedFunction arithmetic(char op) {
    return {[op](std::span<const Expression> args, EvalContext&) -> std::vector<Expression> {
                if (args.empty()) {
                    throw GroundedFaultError("arithmetic needs at least one argument",
                                             std::string(1, op));
                }
                Number acc = number_of(args[0]);
                if (args.size() == 1 && op == '-') {
                    acc.integral ? acc.i = -acc.i : acc.d = -acc.d;
                    return {number_expression(acc)};
                }
                for (std::size_t i = 1; i < args.size(); ++i) {
                    const Number rhs = number_of(args[i]);
                    if (op == '/') {
                        if (rhs.as_double() == 0.0) {
                            throw GroundedFaultError("division by zero", args[i].to_text());
                        }
                        if (acc.integral && rhs.integral && acc.i % rhs.i == 0) {
                            acc.i /= rhs.i;
                        } else {
                            acc = {false, 0, acc.as_double() / rhs.as_double()};
                        }
                        continue;
                    }
                    if (acc.integral && rhs.integral) {
                        switch (op) {
                            case '+': acc.i += rhs.i; break;
                            case '-': acc.i -= rhs.i; break;
                            case '*': acc.i *= rhs.i; break;
                        }
                    } else {
                        double a = acc.as_double();
                        const double b = rhs.as_double();
                        switch (op) {
                            case '+': a += b; break;
                            case '-': a -= b; break;
                            case '*': a *= b; break;
                        }
                        acc = {false, 0, a};
                    }
                }
                return {number_expression(acc)};
            },
            false};
}

const std::string& leaf_text(const Expression& e) {
    if (!e.is_leaf() || !e.label().is_symbol()) {
        throw GroundedFaultError("expected a symbol", e.to_text());
    }
    return e.label().name();
}

/// Calls fn with every combination of one element per part, in lexicographic
/// order. No call at all when some part is empty; one zero-length call when
/// there are no parts.
void for_each_combination(const std::vector<std::vector<Expression>>& parts,
                          const std::function<void(const std::vector<Expression>&)>& fn) {
    if (std::ranges::any_of(parts, [](const auto& p) { return p.empty(); })) return;
    std::vector<std::size_t> pick(parts.size(), 0);
    while (true) {
        std::vector<Expression> chosen;
        chosen.reserve(parts.size());
        for (std::size_t i = 0; i < parts.size(); ++i) chosen.push_back(parts[i][pick[i]]);
        fn(chosen);
        std::size_t i = parts.size();
        bool rolled = true;
        while (i > 0) {
            --i;
            if (++pick[i] < parts[i].size()) {
                rolled = false;
                break;
            }
            pick[i] = 0;
        }
        if (rolled) break;
    }
}

}  // namespace

std::string trace_kind_name(TraceKind kind) {
    switch (kind) {
        case TraceKind::GroundedApply: return "grounded-apply";
        case TraceKind::Match: return "match";
        case TraceKind::Transform: return "transform";
        case TraceKind::EqualityStep: return "equality-step";
        case TraceKind::TypeCheck: return "type-check";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// GroundingRegistry

void GroundingRegistry::add(std::string name, GroundedFunction fn) {
    if (entries_.contains(name)) {
        throw Error("grounded function already registered: " + name);
    }
    entries_.emplace(std::move(name), std::move(fn));
}

const GroundedFunction* GroundingRegistry::find(const std::string& name) const {
    auto it = entries_.find(name);
    return it == entries_.end() ? nullptr : &it->second;
}

GroundingRegistry GroundingRegistry::core() {
    GroundingRegistry registry;
    registry.add("+", arithmetic('+'));
    registry.add("-", arithmetic('-'));
    registry.add("*", arithmetic('*'));
    registry.add("/", arithmetic('/'));
    registry.add("==", {[](std::span<const Expression> args,
                           EvalContext&) -> std::vector<Expression> {
                            if (args.size() != 2) {
                                throw GroundedFaultError("== takes two arguments", "==");
                            }
                            return {Expression::symbol(args[0] == args[1] ? "True" : "False")};
                        },
                        false});
    registry.add("concat", {[](std::span<const Expression> args,
                               EvalContext&) -> std::vector<Expression> {
                                std::string out;
                                for (const Expression& arg : args) out += leaf_text(arg);
                                if (out.empty()) {
                                    throw GroundedFaultError("concat produced an empty symbol",
                                                             "concat");
                                }
                                return {Expression::symbol(out)};
                            },
                            false});
    registry.add("strlen", {[](std::span<const Expression> args,
                               EvalContext&) -> std::vector<Expression> {
                                if (args.size() != 1) {
                                    throw GroundedFaultError("strlen takes one argument", "strlen");
                                }
                                return {Expression::symbol(
                                    std::to_string(leaf_text(args[0]).size()))};
                            },
                            false});
    registry.add("match", {[](std::span<const Expression> args,
                              EvalContext& ctx) -> std::vector<Expression> {
                               if (args.size() != 1) {
                                   throw GroundedFaultError("match takes one pattern", "match");
                               }
                               std::vector<Expression> out;
                               for (const MatchResult& m : match(ctx.view(), args[0])) {
                                   out.push_back(ctx.view().lift(m.matched_root));
                               }
                               return out;
                           },
                           true});
    registry.add("transform", {[](std::span<const Expression> args,
                                  EvalContext& ctx) -> std::vector<Expression> {
                                   if (args.size() != 2) {
                                       throw GroundedFaultError(
                                           "transform takes a pattern and a template",
                                           "transform");
                                   }
                                   return transform(ctx.view(), args[0], args[1]);
                               },
                               true});
    registry.add("quote", {[](std::span<const Expression> args,
                              EvalContext&) -> std::vector<Expression> {
                               if (args.size() != 1) {
                                   throw GroundedFaultError("quote takes one argument", "quote");
                               }
                               return {args[0]};
                           },
                           true});
    return registry;
}

// ---------------------------------------------------------------------------
// Interpreter

struct Interpreter::EvalState {
    std::int64_t fuel = 0;
    bool tracing = false;
    std::vector<TraceEvent> trace{};
    Metagraph trace_space{};
    std::map<EdgeId, EvalTask> tasks{};
};

Interpreter::Interpreter(const Metagraph& space, GroundingRegistry registry,
                         EnrichmentRegistry enrichments)
    : base_(space),
      overlay_(Metagraph::scratch_over(space)),
      registry_(std::move(registry)),
      enrichments_(std::move(enrichments)) {
    overlay_.add_expression(parse("(= (: $t Type) (transform (: $w $t) True))"));
}

std::vector<Expression> Interpreter::eval(const Expression& expr, std::int64_t fuel) {
    if (fuel <= 0) throw Error("fuel must be positive");
    EvalState state;
    state.fuel = fuel;
    return eval_rec(expr, state);
}

EvalOutcome Interpreter::run_with_trace(const Expression& expr, std::int64_t fuel) {
    if (fuel <= 0) throw Error("fuel must be positive");
    EvalState state;
    state.fuel = fuel;
    state.tracing = true;
    EvalOutcome outcome;
    outcome.results = eval_rec(expr, state);
    outcome.trace = std::move(state.trace);
    outcome.trace_space = std::move(state.trace_space);
    return outcome;
}

void Interpreter::record(EvalState& state, TraceKind kind, const Expression& input,
                         std::optional<EdgeId> rule, Bindings bindings,
                         std::span<const Expression> outputs) {
    if (!state.tracing) return;
    TraceEvent event;
    event.step = state.trace.size();
    event.kind = kind;
    event.input = state.trace_space.intern(input);
    event.rule = rule;
    event.bindings = std::move(bindings);
    std::vector<Expression> output_children;
    for (const Expression& out : outputs) {
        event.outputs.push_back(state.trace_space.intern(out));
        output_children.push_back(out);
    }
    state.trace_space.add_expression(Expression::list({
        Expression::symbol("step"),
        Expression::symbol(std::to_string(event.step)),
        Expression::symbol(trace_kind_name(kind)),
        input,
        Expression::list(std::move(output_children)),
    }));
    state.trace.push_back(std::move(event));
}

std::vector<EqualityAnswer> Interpreter::equality_query(const Expression& expr) const {
    std::vector<EqualityAnswer> answers;
    for (const EdgeId& root : overlay_.roots()) {
        const Edge& edge = overlay_.get_edge(root);
        if (!edge.label.is_list() || edge.targets.size() != 3) continue;
        const Edge& head = overlay_.get_edge(edge.targets[0]);
        if (!head.label.is_symbol() || head.label.name() != "=" || !head.targets.empty()) continue;
        const Expression lhs = overlay_.lift(edge.targets[1]);
        auto bindings = unify(lhs, expr, overlay_);
        if (!bindings) continue;
        Expression rhs = substitute(overlay_.lift(edge.targets[2]), *bindings);
        answers.push_back(EqualityAnswer{std::move(*bindings), std::move(rhs), root});
    }
    return answers;
}

bool Interpreter::check_inhabited(const Expression& type_expr) const {
    std::string witness = "w";
    while (type_expr.contains_variable(witness)) witness += '_';
    const Expression pattern = Expression::list(
        {Expression::symbol(":"), Expression::variable(witness), type_expr});
    return !transform(overlay_, pattern, Expression::symbol("True")).empty();
}

std::vector<Expression> Interpreter::activate(EdgeId id, std::int64_t fuel) {
    const Edge& edge = overlay_.get_edge(id);
    const bool marked = edge.label.is_list() && edge.targets.size() == 2 &&
                        [&] {
                            const Edge& head = overlay_.get_edge(edge.targets[0]);
                            return head.label.is_symbol() && head.label.name() == "@" &&
                                   head.targets.empty();
                        }();
    if (!marked) {
        throw NotActivatedError(overlay_.lift(id).to_text());
    }
    return eval(overlay_.lift(edge.targets[1]), fuel);
}

std::optional<std::vector<Expression>> Interpreter::type_check_call(const Expression& expr,
                                                                    EvalState& state) {
    const Expression& head = expr.child(0);
    auto fn_id = overlay_.find(head);
    if (!fn_id) return std::nullopt;
    std::vector<Expression> arrows;
    for (const Expression& type : types_of(overlay_, *fn_id)) {
        if (is_arrow_type(type)) arrows.push_back(type);
    }
    if (arrows.empty()) return std::nullopt;

    bool error = false;
    for (std::size_t argi = 1; argi < expr.size() && !arrows.empty(); ++argi) {
        const std::vector<Expression> arg_types =
            types_of_expression(overlay_, expr.child(argi));
        if (arg_types.empty()) break;  // undefined in type: nothing to check
        std::vector<Expression> next;
        bool accepted = false;
        for (const Expression& arrow : arrows) {
            const Expression& param = arrow.child(1);
            const bool ok = std::ranges::any_of(arg_types, [&](const Expression& t) {
                return inherits(overlay_, t, param);
            });
            if (!ok) continue;
            accepted = true;
            Expression result = [&] {
                if (arrow.size() == 3) return arrow.child(2);
                std::vector<Expression> rest{Expression::symbol("->")};
                for (std::size_t i = 2; i < arrow.size(); ++i) rest.push_back(arrow.child(i));
                return Expression::list(std::move(rest));
            }();
            if (is_arrow_type(result)) next.push_back(std::move(result));
        }
        if (!accepted) {
            error = true;
            break;
        }
        arrows = std::move(next);
    }

    if (error) {
        std::vector<Expression> value{Expression::list(
            {Expression::symbol("Error"), expr, Expression::symbol("type-error")})};
        record(state, TraceKind::TypeCheck, expr, std::nullopt, {}, value);
        return value;
    }
    record(state, TraceKind::TypeCheck, expr, std::nullopt, {}, {});
    return std::nullopt;
}

std::vector<Expression> Interpreter::apply_grounded(const Expression& expr,
                                                    const std::string& name,
                                                    const GroundedFunction& fn, EvalState& state) {
    if (auto error_value = type_check_call(expr, state)) {
        return *error_value;
    }
    EvalContext ctx{*this, state};
    auto invoke = [&](std::span<const Expression> args) -> std::vector<Expression> {
        try {
            return fn.fn(args, ctx);
        } catch (const EvalError&) {
            throw;
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            throw GroundedFaultError(e.what(), expr.to_text());
        }
    };

    std::set<Expression> out;
    if (fn.quoting) {
        std::vector<Expression> args(expr.children().begin() + 1, expr.children().end());
        for (Expression& result : invoke(args)) out.insert(std::move(result));
    } else {
        std::vector<std::vector<Expression>> parts;
        for (std::size_t i = 1; i < expr.size(); ++i) {
            parts.push_back(eval_rec(expr.child(i), state));
        }
        for_each_combination(parts, [&](const std::vector<Expression>& args) {
            for (Expression& result : invoke(args)) out.insert(std::move(result));
        });
    }
    std::vector<Expression> results(out.begin(), out.end());
    TraceKind kind = TraceKind::GroundedApply;
    if (name == "match") kind = TraceKind::Match;
    if (name == "transform") kind = TraceKind::Transform;
    record(state, kind, expr, std::nullopt, {}, results);
    return results;
}

std::vector<Expression> Interpreter::eval_rec(const Expression& expr, EvalState& state) {
    if (state.fuel <= 0) throw FuelExhaustedError(expr.to_text());
    --state.fuel;

    const EdgeId key = overlay_.intern(expr);
    auto existing = state.tasks.find(key);
    bool reentrant = false;
    if (existing != state.tasks.end()) {
        if (existing->second.status == EvalTask::Status::Done) {
            return existing->second.results;
        }
        reentrant = true;  // self-referential evaluation: recurse without memoizing
    } else {
        EvalTask task;
        task.target = key;
        task.status = EvalTask::Status::InProgress;
        task.fuel_remaining = state.fuel;
        state.tasks.emplace(key, std::move(task));
    }

    std::vector<Expression> results = [&]() -> std::vector<Expression> {
        // @ activation: evaluate the marked sub-expression.
        if (expr.is_list() && expr.size() == 2 && is_plain_symbol(expr.child(0), "@")) {
            std::vector<Expression> inner = eval_rec(expr.child(1), state);
            record(state, TraceKind::GroundedApply, expr, std::nullopt, {}, inner);
            return inner;
        }

        // Grounded head in call position.
        if (expr.is_list() && expr.size() >= 1 && expr.child(0).is_leaf()) {
            const Label& head = expr.child(0).label();
            if (head.is_symbol() || head.is_grounded()) {
                if (const GroundedFunction* fn = registry_.find(head.name())) {
                    return apply_grounded(expr, head.name(), *fn, state);
                }
                if (head.is_grounded()) {
                    throw GroundedFaultError("unresolved grounded symbol &" + head.name(),
                                             expr.to_text());
                }
            }
        }

        // Equality query over the whole expression.
        std::vector<EqualityAnswer> answers = equality_query(expr);
        if (!answers.empty()) {
            std::set<Expression> out;
            for (EqualityAnswer& answer : answers) {
                record(state, TraceKind::EqualityStep, expr, answer.rule, answer.bindings,
                       {&answer.rhs, 1});
                for (Expression& r : eval_rec(answer.rhs, state)) out.insert(std::move(r));
            }
            return {out.begin(), out.end()};
        }

        // No equality applies. Leaves are normal forms; lists normalize their
        // children and retry the whole.
        if (expr.is_leaf()) {
            record(state, TraceKind::EqualityStep, expr, std::nullopt, {}, {&expr, 1});
            return {expr};
        }

        std::vector<std::vector<Expression>> parts;
        for (const Expression& child : expr.children()) {
            parts.push_back(eval_rec(child, state));
        }
        std::set<Expression> out;
        for_each_combination(parts, [&](const std::vector<Expression>& children) {
            Expression next = Expression::list(children);
            if (expr.enrichment()) next = next.with_enrichment(*expr.enrichment());
            if (next == expr) {
                out.insert(expr);
            } else {
                for (Expression& r : eval_rec(next, state)) out.insert(std::move(r));
            }
        });
        std::vector<Expression> results_vec(out.begin(), out.end());
        record(state, TraceKind::EqualityStep, expr, std::nullopt, {}, results_vec);
        return results_vec;
    }();

    if (!reentrant) {
        EvalTask& task = state.tasks.at(key);
        task.status = EvalTask::Status::Done;
        task.results = results;
    }
    return results;
}

std::vector<Expression> EvalContext::eval(const Expression& expr) {
    return interpreter.eval_rec(expr, state);
}

std::string trace_to_json_lines(const EvalOutcome& outcome, const Metagraph& space) {
    std::string out;
    for (const TraceEvent& event : outcome.trace) {
        nlohmann::json line;
        line["step"] = event.step;
        line["kind"] = trace_kind_name(event.kind);
        line["input"] = outcome.trace_space.lift(event.input).to_text();
        if (event.rule) {
            line["rule"] = space.lift(*event.rule).to_text();
        } else {
            line["rule"] = nullptr;
        }
        nlohmann::json bindings = nlohmann::json::object();
        for (const auto& [name, entry] : event.bindings.entries()) {
            if (event.bindings.space()) {
                bindings["$" + name] = event.bindings.space()->lift(entry.referent).to_text();
            }
        }
        line["bindings"] = bindings;
        nlohmann::json outputs = nlohmann::json::array();
        for (const EdgeId& output : event.outputs) {
            outputs.push_back(outcome.trace_space.lift(output).to_text());
        }
        line["outputs"] = outputs;
        out += line.dump();
        out += '\n';
    }
    return out;
}

}  // namespace mgrew

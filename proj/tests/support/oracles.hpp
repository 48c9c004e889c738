#pragma once

// Brute-force reference implementations used as test oracles. Everything here
// recomputes its answer from first principles, independently of the library
// code paths under test.

#include <mgrew/enrichments.hpp>
#include <mgrew/expression.hpp>
#include <mgrew/matcher.hpp>
#include <mgrew/metagraph.hpp>

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace oracle {

using mgrew::Edge;
using mgrew::EdgeId;
using mgrew::Expression;
using mgrew::Metagraph;

// -- structural signature (isomorphism for hash-consed stores) --------------

struct Signature {
    std::set<std::pair<std::string, bool>> edges;  // (expression text, is-root)

    bool operator==(const Signature&) const = default;
};

inline Signature signature(const Metagraph& space) {
    Signature sig;
    for (const EdgeId& id : space.edge_ids()) {
        sig.edges.emplace(space.lift(id).to_text(), space.is_root(id));
    }
    return sig;
}

// -- naive substitution ------------------------------------------------------

inline Expression naive_substitute(const Expression& expr,
                                   const std::map<std::string, Expression>& assignment) {
    if (expr.is_variable()) {
        auto it = assignment.find(expr.label().name());
        return it == assignment.end() ? expr : it->second;
    }
    if (expr.is_leaf()) return expr;
    std::vector<Expression> children;
    for (const Expression& child : expr.children()) {
        children.push_back(naive_substitute(child, assignment));
    }
    Expression out = Expression::list(std::move(children));
    return expr.enrichment() ? out.with_enrichment(*expr.enrichment()) : out;
}

// -- inheritance closure by boolean matrix powering --------------------------

struct Closure {
    std::vector<std::string> types;  // declared type texts (Type included)
    std::vector<std::vector<bool>> reach;

    bool holds(const std::string& a, const std::string& b) const {
        if (a == b) return true;
        auto ia = std::ranges::find(types, a);
        auto ib = std::ranges::find(types, b);
        if (ia == types.end() || ib == types.end()) return false;
        return reach[static_cast<std::size_t>(ia - types.begin())]
                    [static_cast<std::size_t>(ib - types.begin())];
    }
};

inline std::vector<std::array<Expression, 2>> fact_pairs(const Metagraph& space) {
    std::vector<std::array<Expression, 2>> facts;
    for (const EdgeId& root : space.roots()) {
        const Expression expr = space.lift(root);
        if (expr.is_list() && expr.size() == 3 && expr.child(0).is_leaf() &&
            expr.child(0).label().is_symbol() && expr.child(0).label().name() == ":") {
            facts.push_back({expr.child(1), expr.child(2)});
        }
    }
    return facts;
}

inline Closure closure(const Metagraph& space) {
    Closure c;
    c.types.push_back("Type");
    for (const auto& [subject, type] : fact_pairs(space)) {
        if (type.is_leaf() && type.label().is_symbol() && type.label().name() == "Type") {
            const std::string text = subject.to_text();
            if (std::ranges::find(c.types, text) == c.types.end()) c.types.push_back(text);
        }
    }
    const std::size_t n = c.types.size();
    std::vector<std::vector<bool>> m(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i) m[i][i] = true;
    for (const auto& [subject, type] : fact_pairs(space)) {
        auto a = std::ranges::find(c.types, subject.to_text());
        auto b = std::ranges::find(c.types, type.to_text());
        if (a != c.types.end() && b != c.types.end()) {
            m[static_cast<std::size_t>(a - c.types.begin())]
             [static_cast<std::size_t>(b - c.types.begin())] = true;
        }
    }
    // Repeated squaring until fixpoint.
    auto multiply = [n](const auto& x, const auto& y) {
        std::vector<std::vector<bool>> out(n, std::vector<bool>(n, false));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < n; ++k) {
                if (!x[i][k]) continue;
                for (std::size_t j = 0; j < n; ++j) {
                    if (y[k][j]) out[i][j] = true;
                }
            }
        }
        return out;
    };
    while (true) {
        auto squared = multiply(m, m);
        if (squared == m) break;
        m = std::move(squared);
    }
    c.reach = std::move(m);
    return c;
}

// -- variable type constraints ------------------------------------------------

inline std::vector<Expression> declared_types(const Metagraph& space, const Expression& subject) {
    std::vector<Expression> out;
    for (const auto& [s, t] : fact_pairs(space)) {
        if (s == subject && std::ranges::find(out, t) == out.end()) out.push_back(t);
    }
    return out;
}

inline bool referent_satisfies(const Metagraph& space, const Closure& c,
                               const std::string& var_name, const Expression& referent) {
    for (const Expression& constraint : declared_types(space, Expression::variable(var_name))) {
        bool ok = false;
        for (const Expression& t : declared_types(space, referent)) {
            if (c.holds(t.to_text(), constraint.to_text())) {
                ok = true;
                break;
            }
        }
        if (!ok) return false;
    }
    return true;
}

// -- brute-force match enumeration -------------------------------------------

struct BruteMatch {
    EdgeId root;
    std::map<std::string, EdgeId> assignment;

    bool operator==(const BruteMatch&) const = default;
    auto operator<=>(const BruteMatch&) const = default;
};

/// Enumerates every assignment of the pattern's variables to edges of the
/// space for which naive one-level substitution reproduces a root exactly,
/// skipping assignments that bind a variable to an expression containing it
/// or that violate a declared type constraint.
inline std::vector<BruteMatch> brute_match(const Metagraph& space, const Expression& pattern) {
    const std::vector<std::string> vars = pattern.free_variables();
    const std::vector<EdgeId> edges = space.edge_ids();
    const Closure c = closure(space);

    std::vector<BruteMatch> out;
    std::vector<std::size_t> pick(vars.size(), 0);
    while (true) {
        std::map<std::string, Expression> assignment;
        std::map<std::string, EdgeId> ids;
        bool legal = true;
        for (std::size_t i = 0; i < vars.size() && legal; ++i) {
            const Expression referent = space.lift(edges[pick[i]]);
            if (referent.contains_variable(vars[i])) legal = false;
            if (legal && !referent_satisfies(space, c, vars[i], referent)) legal = false;
            assignment.emplace(vars[i], referent);
            ids.emplace(vars[i], edges[pick[i]]);
        }
        if (legal) {
            const Expression instantiated = naive_substitute(pattern, assignment);
            for (const EdgeId& root : space.roots()) {
                if (space.lift(root) == instantiated) {
                    out.push_back(BruteMatch{root, ids});
                }
            }
        }
        if (vars.empty()) break;
        std::size_t i = vars.size();
        bool rolled = true;
        while (i > 0) {
            --i;
            if (++pick[i] < edges.size()) {
                rolled = false;
                break;
            }
            pick[i] = 0;
        }
        if (rolled) break;
    }
    std::ranges::sort(out);
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// -- brute-force homomorphism enumeration -------------------------------------

inline std::vector<EdgeId> brute_domain(const Metagraph& pattern) {
    std::set<EdgeId> domain;
    auto add = [&](auto&& self, EdgeId id) -> void {
        if (!domain.insert(id).second) return;
        for (const EdgeId& t : pattern.get_edge(id).targets) self(self, t);
    };
    for (const EdgeId& root : pattern.roots()) {
        const Expression expr = pattern.lift(root);
        const bool fact = expr.is_list() && expr.size() == 3 && expr.child(0).is_leaf() &&
                          expr.child(0).label().is_symbol() &&
                          expr.child(0).label().name() == ":";
        if (!fact) add(add, root);
    }
    return {domain.begin(), domain.end()};
}

inline bool brute_hom_ok(const Metagraph& pattern, const Metagraph& host,
                         const std::vector<EdgeId>& domain,
                         const std::map<EdgeId, EdgeId>& map,
                         const mgrew::EnrichmentRegistry& registry) {
    const Closure host_closure = closure(host);
    for (const EdgeId& pe : domain) {
        const Edge& p = pattern.get_edge(pe);
        const Edge& h = host.get_edge(map.at(pe));
        if (!p.label.is_variable() && !(p.label == h.label)) return false;
        // image types inherit from pattern types
        const std::vector<Expression> wanted = declared_types(pattern, pattern.lift(pe));
        if (!wanted.empty()) {
            const std::vector<Expression> image_types = declared_types(host, host.lift(map.at(pe)));
            for (const Expression& t : wanted) {
                bool ok = false;
                for (const Expression& it : image_types) {
                    if (host_closure.holds(it.to_text(), t.to_text())) {
                        ok = true;
                        break;
                    }
                }
                if (!ok) return false;
            }
        }
        if (p.enrichment) {
            if (!h.enrichment || h.enrichment->kind != p.enrichment->kind) return false;
        }
        // order-preserving subsequence of targets
        std::size_t pos = 0;
        for (const EdgeId& pt : p.targets) {
            const EdgeId want = map.at(pt);
            while (pos < h.targets.size() && h.targets[pos] != want) ++pos;
            if (pos == h.targets.size()) return false;
            ++pos;
        }
    }
    // one enrichment witness per kind, consistent across all pairs
    std::map<std::string, std::vector<std::pair<mgrew::Payload, mgrew::Payload>>> pairs;
    for (const EdgeId& pe : domain) {
        const Edge& p = pattern.get_edge(pe);
        if (!p.enrichment) continue;
        const Edge& h = host.get_edge(map.at(pe));
        pairs[p.enrichment->kind].emplace_back(p.enrichment->payload, h.enrichment->payload);
    }
    for (const auto& [kind, payload_pairs] : pairs) {
        bool identity_works = std::ranges::all_of(
            payload_pairs, [](const auto& pr) { return pr.first == pr.second; });
        bool found = identity_works;
        if (!found && registry.has_kind(kind)) {
            for (const mgrew::EnrichmentKind::Witness& w : registry.kind(kind).witnesses) {
                if (std::ranges::all_of(payload_pairs, [&](const auto& pr) {
                        return w.map(pr.first) == pr.second;
                    })) {
                    found = true;
                    break;
                }
            }
        }
        if (!found) return false;
    }
    return true;
}

inline std::vector<std::map<EdgeId, EdgeId>> brute_homomorphisms(
    const Metagraph& pattern, const Metagraph& host, const mgrew::EnrichmentRegistry& registry) {
    const std::vector<EdgeId> domain = brute_domain(pattern);
    const std::vector<EdgeId> hosts = host.edge_ids();
    std::vector<std::map<EdgeId, EdgeId>> out;
    if (domain.empty() || hosts.empty()) return out;
    std::vector<std::size_t> pick(domain.size(), 0);
    while (true) {
        std::map<EdgeId, EdgeId> map;
        for (std::size_t i = 0; i < domain.size(); ++i) map.emplace(domain[i], hosts[pick[i]]);
        if (brute_hom_ok(pattern, host, domain, map, registry)) out.push_back(std::move(map));
        std::size_t i = domain.size();
        bool rolled = true;
        while (i > 0) {
            --i;
            if (++pick[i] < hosts.size()) {
                rolled = false;
                break;
            }
            pick[i] = 0;
        }
        if (rolled) break;
    }
    std::ranges::sort(out);
    return out;
}

// -- random generators ---------------------------------------------------------

struct Rng {
    std::mt19937 gen;

    explicit Rng(std::uint32_t seed) : gen(seed) {}

    std::size_t below(std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen);
    }
    bool chance(double p) { return std::uniform_real_distribution<>(0.0, 1.0)(gen) < p; }

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[below(v.size())];
    }
};

inline Expression random_expression(Rng& rng, int depth, const std::vector<std::string>& symbols,
                                    const std::vector<std::string>& variables,
                                    double variable_chance = 0.25) {
    if (depth <= 0 || rng.chance(0.35)) {
        if (!variables.empty() && rng.chance(variable_chance)) {
            return Expression::variable(rng.pick(variables));
        }
        return Expression::symbol(rng.pick(symbols));
    }
    const std::size_t arity = 1 + rng.below(3);
    std::vector<Expression> children;
    for (std::size_t i = 0; i < arity; ++i) {
        children.push_back(
            random_expression(rng, depth - 1, symbols, variables, variable_chance));
    }
    return Expression::list(std::move(children));
}

}  // namespace oracle

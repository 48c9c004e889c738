#include <mgrew/matcher.hpp>

#include <mgrew/errors.hpp>
#include <mgrew/types.hpp>

#include <algorithm>
#include <deque>
#include <set>

namespace mgrew {

namespace {

Expression substitute_one(const Expression& expr, const std::string& name,
                          const Expression& value) {
    if (expr.is_variable()) {
        return expr.label().name() == name ? value : expr;
    }
    if (expr.is_leaf()) return expr;
    std::vector<Expression> children;
    children.reserve(expr.size());
    for (const Expression& child : expr.children()) {
        children.push_back(substitute_one(child, name, value));
    }
    Expression out = Expression::list(std::move(children));
    return expr.enrichment() ? out.with_enrichment(*expr.enrichment()) : out;
}

bool referent_type_ok(const Metagraph& space, const std::string& var_name,
                      const Expression& referent) {
    const std::vector<Expression> constraints =
        types_of_expression(space, Expression::variable(var_name));
    if (constraints.empty()) return true;
    const std::vector<Expression> referent_types = types_of_expression(space, referent);
    for (const Expression& constraint : constraints) {
        const bool ok = std::ranges::any_of(referent_types, [&](const Expression& t) {
            return inherits(space, t, constraint);
        });
        if (!ok) return false;
    }
    return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// Bindings

std::optional<BindingEntry> Bindings::lookup(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

std::optional<Bindings> Bindings::merged(const Bindings& a, const Bindings& b) {
    Bindings out = a;
    if (!out.space_) {
        out.space_ = b.space_;
        out.owned_ = b.owned_;
    }
    for (const auto& [name, entry] : b.entries_) {
        auto it = out.entries_.find(name);
        if (it == out.entries_.end()) {
            out.entries_.emplace(name, entry);
        } else if (it->second.referent != entry.referent) {
            return std::nullopt;
        }
    }
    return out;
}

void Bindings::attach(const Metagraph* view, std::shared_ptr<const Metagraph> owned) {
    space_ = view;
    owned_ = std::move(owned);
}

bool Bindings::insert(const std::string& name, EdgeId referent, BindingSide side) {
    auto it = entries_.find(name);
    if (it != entries_.end()) return it->second.referent == referent;
    entries_.emplace(name, BindingEntry{referent, side});
    return true;
}

void Bindings::overwrite(const std::string& name, EdgeId referent, BindingSide side) {
    entries_[name] = BindingEntry{referent, side};
}

// ---------------------------------------------------------------------------
// Homomorphism search

const EnrichmentRegistry& default_enrichments() {
    static const EnrichmentRegistry registry = EnrichmentRegistry::with_builtins();
    return registry;
}

std::vector<EdgeId> pattern_domain(const Metagraph& pattern) {
    std::set<EdgeId> domain;
    std::deque<EdgeId> queue;
    for (const EdgeId& root : pattern.roots()) {
        if (!is_type_fact(pattern, pattern.get_edge(root))) queue.push_back(root);
    }
    while (!queue.empty()) {
        const EdgeId id = queue.front();
        queue.pop_front();
        if (!domain.insert(id).second) continue;
        for (const EdgeId& t : pattern.get_edge(id).targets) queue.push_back(t);
    }
    return {domain.begin(), domain.end()};
}

namespace {

bool label_compatible(const Edge& pattern_edge, const Edge& host_edge) {
    if (pattern_edge.label.is_variable()) return true;
    return pattern_edge.label == host_edge.label;
}

bool types_compatible(const Metagraph& pattern, const Metagraph& host, EdgeId pattern_edge,
                      EdgeId host_edge) {
    const std::vector<Expression> wanted = types_of(pattern, pattern_edge);
    if (wanted.empty()) return true;
    const std::vector<Expression> image_types = types_of(host, host_edge);
    for (const Expression& t : wanted) {
        const bool ok = std::ranges::any_of(image_types, [&](const Expression& image_type) {
            return inherits(host, image_type, t);
        });
        if (!ok) return false;
    }
    return true;
}

/// (image(t1)..image(tk)) must occur within the host target list in order,
/// with host-only targets allowed in between.
bool targets_subsequence(const Edge& pattern_edge, const Edge& host_edge,
                         const std::map<EdgeId, EdgeId>& assignment) {
    std::size_t host_pos = 0;
    for (const EdgeId& pt : pattern_edge.targets) {
        const EdgeId image = assignment.at(pt);
        while (host_pos < host_edge.targets.size() && host_edge.targets[host_pos] != image) {
            ++host_pos;
        }
        if (host_pos == host_edge.targets.size()) return false;
        ++host_pos;
    }
    return true;
}

struct HomSearch {
    const Metagraph& pattern;
    const Metagraph& host;
    const EnrichmentRegistry& enrichments;
    std::optional<std::size_t> limit;

    std::vector<EdgeId> order{};
    std::map<EdgeId, std::vector<EdgeId>> candidates{};
    std::map<EdgeId, std::vector<EdgeId>> dependents{};  // target -> pattern edges listing it
    std::map<EdgeId, EdgeId> assignment{};
    std::map<std::string, std::vector<std::string>> viable{};  // kind -> witness names
    std::vector<HomomorphismMap> results{};

    bool done() const { return limit && results.size() >= *limit; }

    bool structure_ok(EdgeId changed) {
        auto fully_assigned = [&](EdgeId pe) {
            if (!assignment.contains(pe)) return false;
            const Edge& edge = pattern.get_edge(pe);
            return std::ranges::all_of(edge.targets,
                                       [&](const EdgeId& t) { return assignment.contains(t); });
        };
        auto check = [&](EdgeId pe) {
            return targets_subsequence(pattern.get_edge(pe), host.get_edge(assignment.at(pe)),
                                       assignment);
        };
        if (fully_assigned(changed) && !check(changed)) return false;
        auto dep = dependents.find(changed);
        if (dep != dependents.end()) {
            for (const EdgeId& pe : dep->second) {
                if (pe != changed && fully_assigned(pe) && !check(pe)) return false;
            }
        }
        return true;
    }

    void finalize() {
        HomomorphismMap hom;
        hom.edge_map = assignment;
        for (const auto& [kind, names] : viable) {
            hom.witnesses.emplace(kind, names.front());
        }
        results.push_back(std::move(hom));
    }

    void search(std::size_t depth) {
        if (done()) return;
        if (depth == order.size()) {
            finalize();
            return;
        }
        const EdgeId pe = order[depth];
        const Edge& pattern_edge = pattern.get_edge(pe);
        for (const EdgeId& he : candidates.at(pe)) {
            if (done()) return;
            std::optional<std::vector<std::string>> saved_viable;
            if (pattern_edge.enrichment) {
                const std::string& kind = pattern_edge.enrichment->kind;
                const Edge& host_edge = host.get_edge(he);
                const std::vector<std::string> names = enrichments.witnesses_mapping(
                    kind, pattern_edge.enrichment->payload, host_edge.enrichment->payload);
                std::vector<std::string> narrowed;
                for (const std::string& name : viable.at(kind)) {
                    if (std::ranges::find(names, name) != names.end()) narrowed.push_back(name);
                }
                if (narrowed.empty()) continue;
                saved_viable = viable[kind];
                viable[kind] = std::move(narrowed);
            }
            assignment[pe] = he;
            if (structure_ok(pe)) search(depth + 1);
            assignment.erase(pe);
            if (saved_viable) viable[pattern_edge.enrichment->kind] = std::move(*saved_viable);
        }
    }
};

}  // namespace

OrderingHeuristic label_selectivity_heuristic() {
    return [](const CandidateContext& ctx) {
        const Edge& edge = ctx.pattern.get_edge(ctx.pattern_edge);
        if (edge.label.is_variable()) {
            return static_cast<double>(ctx.host.edge_count());
        }
        return static_cast<double>(ctx.host.edges_with_label(edge.label).size());
    };
}

OrderingHeuristic smallest_candidate_set_heuristic() {
    return [](const CandidateContext& ctx) { return static_cast<double>(ctx.candidates.size()); };
}

std::vector<HomomorphismMap> find_homomorphisms(const Metagraph& pattern, const Metagraph& host,
                                                std::optional<std::size_t> limit,
                                                OrderingHeuristic heuristic,
                                                const EnrichmentRegistry& enrichments) {
    const std::vector<EdgeId> domain = pattern_domain(pattern);
    if (domain.empty()) {
        throw Error("find_homomorphisms: empty pattern");
    }
    HomSearch search{pattern, host, enrichments, limit};
    search.order = domain;

    const std::vector<EdgeId> host_edges = host.edge_ids();
    for (const EdgeId& pe : domain) {
        const Edge& pattern_edge = pattern.get_edge(pe);
        std::vector<EdgeId> list;
        for (const EdgeId& he : host_edges) {
            const Edge& host_edge = host.get_edge(he);
            if (!label_compatible(pattern_edge, host_edge)) continue;
            if (pattern_edge.enrichment &&
                (!host_edge.enrichment ||
                 host_edge.enrichment->kind != pattern_edge.enrichment->kind)) {
                continue;
            }
            if (!types_compatible(pattern, host, pe, he)) continue;
            list.push_back(he);
        }
        search.candidates.emplace(pe, std::move(list));
        for (const EdgeId& t : pattern_edge.targets) {
            search.dependents[t].push_back(pe);
        }
        if (pattern_edge.enrichment) {
            search.viable.try_emplace(pattern_edge.enrichment->kind);
        }
    }
    // Per-kind witness universe: identity plus every registered witness name.
    for (auto& [kind, names] : search.viable) {
        names.push_back("identity");
        if (enrichments.has_kind(kind)) {
            for (const EnrichmentKind::Witness& w : enrichments.kind(kind).witnesses) {
                names.push_back(w.name);
            }
        }
    }

    if (heuristic) {
        std::ranges::stable_sort(search.order, [&](const EdgeId& a, const EdgeId& b) {
            const double pa = heuristic(CandidateContext{pattern, host, a, search.candidates.at(a)});
            const double pb = heuristic(CandidateContext{pattern, host, b, search.candidates.at(b)});
            if (pa != pb) return pa < pb;
            return a < b;
        });
    }

    search.search(0);
    return std::move(search.results);
}

bool is_valid_homomorphism(const Metagraph& pattern, const Metagraph& host,
                           const HomomorphismMap& hom, const EnrichmentRegistry& enrichments) {
    const std::vector<EdgeId> domain = pattern_domain(pattern);
    std::map<std::string, std::set<std::string>> viable;
    for (const EdgeId& pe : domain) {
        auto it = hom.edge_map.find(pe);
        if (it == hom.edge_map.end()) return false;
        if (!host.contains(it->second)) return false;
        const Edge& pattern_edge = pattern.get_edge(pe);
        const Edge& host_edge = host.get_edge(it->second);
        if (!label_compatible(pattern_edge, host_edge)) return false;
        if (!types_compatible(pattern, host, pe, it->second)) return false;
        if (pattern_edge.enrichment) {
            if (!host_edge.enrichment ||
                host_edge.enrichment->kind != pattern_edge.enrichment->kind) {
                return false;
            }
            const std::string& kind = pattern_edge.enrichment->kind;
            const std::vector<std::string> names = enrichments.witnesses_mapping(
                kind, pattern_edge.enrichment->payload, host_edge.enrichment->payload);
            std::set<std::string> name_set(names.begin(), names.end());
            auto entry = viable.find(kind);
            if (entry == viable.end()) {
                viable.emplace(kind, std::move(name_set));
            } else {
                std::set<std::string> intersection;
                std::ranges::set_intersection(
                    entry->second, name_set,
                    std::inserter(intersection, intersection.begin()));
                entry->second = std::move(intersection);
            }
            if (viable.at(kind).empty()) return false;
        }
    }
    for (const EdgeId& pe : domain) {
        if (!targets_subsequence(pattern.get_edge(pe), host.get_edge(hom.edge_map.at(pe)),
                                 hom.edge_map)) {
            return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Unification

namespace {

struct Unifier {
    const Metagraph& space;
    std::shared_ptr<Metagraph> scratch;
    std::map<std::string, BindingEntry> entries{};
    std::set<std::string> pattern_vars{};
    std::deque<Expression> lifted_{};

    /// Bindings are kept in solved form: no referent mentions a bound
    /// variable. walk() therefore only needs to chase a top-level variable;
    /// deeper variables resolve when the recursion reaches them. Lifted
    /// referents are parked in lifted_ so a reference can be handed back
    /// without copying the (possibly large) input.
    const Expression& walk(const Expression& e) {
        if (e.is_variable()) {
            auto it = entries.find(e.label().name());
            if (it != entries.end()) {
                lifted_.push_back(scratch->lift(it->second.referent));
                return lifted_.back();
            }
        }
        return e;
    }

    Expression resolve(const Expression& e) const {
        if (e.is_variable()) {
            auto it = entries.find(e.label().name());
            if (it != entries.end()) return scratch->lift(it->second.referent);
            return e;
        }
        if (e.is_leaf()) return e;
        std::vector<Expression> children;
        children.reserve(e.size());
        for (const Expression& child : e.children()) children.push_back(resolve(child));
        Expression out = Expression::list(std::move(children));
        return e.enrichment() ? out.with_enrichment(*e.enrichment()) : out;
    }

    BindingSide side_of(const std::string& name) const {
        return pattern_vars.contains(name) ? BindingSide::Pattern : BindingSide::Target;
    }

    bool bind(const std::string& name, const Expression& raw) {
        const Expression value = resolve(raw);
        if (value.is_variable() && value.label().name() == name) return true;
        if (value.contains_variable(name)) return false;  // occurs check
        // Re-solve existing referents that mention the newly bound variable.
        for (auto& [other, entry] : entries) {
            Expression referent = scratch->lift(entry.referent);
            if (!referent.contains_variable(name)) continue;
            referent = substitute_one(referent, name, value);
            if (referent.contains_variable(other)) return false;  // binding cycle
            entry.referent = scratch->intern(referent);
        }
        entries.emplace(name, BindingEntry{scratch->intern(value), side_of(name)});
        return true;
    }

    bool unify_rec(const Expression& left, const Expression& right) {
        const Expression& a = walk(left);
        const Expression& b = walk(right);
        if (a.is_variable() && b.is_variable()) {
            if (a.label().name() == b.label().name()) return true;
            // Pattern variables take precedence; between equals the left
            // side binds, which keeps results deterministic.
            const bool a_pattern = pattern_vars.contains(a.label().name());
            const bool b_pattern = pattern_vars.contains(b.label().name());
            if (a_pattern || !b_pattern) return bind(a.label().name(), b);
            return bind(b.label().name(), a);
        }
        if (a.is_variable()) return bind(a.label().name(), b);
        if (b.is_variable()) return bind(b.label().name(), a);
        if (a.is_leaf() || b.is_leaf()) {
            return a == b;
        }
        if (a.size() != b.size()) return false;
        if (a.enrichment() != b.enrichment()) return false;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (!unify_rec(a.child(i), b.child(i))) return false;
        }
        return true;
    }

    bool types_ok() const {
        for (const auto& [name, entry] : entries) {
            const Expression referent = scratch->lift(entry.referent);
            if (referent.is_variable()) continue;
            if (!referent_type_ok(space, name, referent)) return false;
        }
        return true;
    }
};

}  // namespace

std::optional<Bindings> unify(const Expression& p, const Expression& e, const Metagraph& space) {
    Unifier unifier{space, std::make_shared<Metagraph>(Metagraph::scratch_over(space))};
    for (const std::string& name : p.free_variables()) unifier.pattern_vars.insert(name);
    if (!unifier.unify_rec(p, e)) return std::nullopt;
    if (!unifier.types_ok()) return std::nullopt;
    Bindings bindings;
    for (const auto& [name, entry] : unifier.entries) {
        bindings.insert(name, entry.referent, entry.side);
    }
    bindings.attach(unifier.scratch.get(), unifier.scratch);
    return bindings;
}

Expression substitute(const Expression& expr, const Bindings& bindings) {
    if (expr.is_variable()) {
        auto entry = bindings.lookup(expr.label().name());
        if (entry && bindings.space()) return bindings.space()->lift(entry->referent);
        return expr;
    }
    if (expr.is_leaf()) return expr;
    std::vector<Expression> children;
    children.reserve(expr.size());
    for (const Expression& child : expr.children()) {
        children.push_back(substitute(child, bindings));
    }
    Expression out = Expression::list(std::move(children));
    return expr.enrichment() ? out.with_enrichment(*expr.enrichment()) : out;
}

// ---------------------------------------------------------------------------
// Literal matching against root expressions

namespace {

/// Matches a pattern against a stored edge such that replacing each bound
/// variable by its referent reproduces the edge's expression exactly.
/// Target-side variables act as constants: they can be aliased by a pattern
/// variable but never bind themselves.
struct LiteralMatcher {
    const Metagraph& space;
    std::map<std::string, EdgeId> bound{};

    bool walk(const Expression& p, EdgeId host, bool ignore_enrichment) {
        const Edge& edge = space.get_edge(host);
        if (p.is_variable()) {
            const std::string& name = p.label().name();
            auto it = bound.find(name);
            if (it != bound.end()) return it->second == host;  // hash-consed: id equality
            if (space.lift(host).contains_variable(name)) return false;  // occurs check
            for (const Expression& constraint : types_of_expression(space, p)) {
                const std::vector<Expression> host_types = types_of(space, host);
                const bool ok = std::ranges::any_of(host_types, [&](const Expression& t) {
                    return inherits(space, t, constraint);
                });
                if (!ok) return false;
            }
            bound.emplace(name, host);
            return true;
        }
        if (!ignore_enrichment && p.enrichment() != edge.enrichment) return false;
        if (p.is_leaf()) {
            return edge.targets.empty() && p.label() == edge.label;
        }
        if (!edge.label.is_list() || edge.targets.size() != p.size()) return false;
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (!walk(p.child(i), edge.targets[i], false)) return false;
        }
        return true;
    }
};

void build_hom(const Metagraph& pattern_space, const Metagraph& host, const Expression& p,
               EdgeId pattern_id, EdgeId host_id, HomomorphismMap& hom) {
    hom.edge_map[pattern_id] = host_id;
    if (p.enrichment()) {
        hom.witnesses.emplace(p.enrichment()->kind, "identity");
    }
    if (!p.is_list()) return;
    const Edge& pattern_edge = pattern_space.get_edge(pattern_id);
    const Edge& host_edge = host.get_edge(host_id);
    for (std::size_t i = 0; i < p.size(); ++i) {
        build_hom(pattern_space, host, p.child(i), pattern_edge.targets[i], host_edge.targets[i],
                  hom);
    }
}

std::vector<MatchResult> match_impl(const Metagraph& space, const Expression& pattern,
                                    bool ignore_root_enrichment,
                                    const std::optional<std::string>& required_kind) {
    std::vector<MatchResult> results;
    std::shared_ptr<Metagraph> pattern_scratch;
    std::optional<EdgeId> pattern_id;
    for (const EdgeId& root : space.roots()) {
        if (required_kind) {
            const Edge& root_edge = space.get_edge(root);
            if (!root_edge.enrichment || root_edge.enrichment->kind != *required_kind) continue;
        }
        LiteralMatcher matcher{space};
        if (!matcher.walk(pattern, root, ignore_root_enrichment)) continue;
        if (!pattern_scratch) {
            pattern_scratch = std::make_shared<Metagraph>();
            pattern_id = pattern_scratch->add_expression(pattern);
        }
        MatchResult result;
        result.matched_root = root;
        result.pattern_space = pattern_scratch;
        for (const auto& [name, referent] : matcher.bound) {
            result.bindings.insert(name, referent, BindingSide::Pattern);
        }
        result.bindings.attach(&space);
        build_hom(*pattern_scratch, space, pattern, *pattern_id, root, result.hom);
        results.push_back(std::move(result));
    }
    return results;
}

}  // namespace

std::vector<MatchResult> match(const Metagraph& space, const Expression& pattern) {
    return match_impl(space, pattern, false, std::nullopt);
}

std::vector<Bindings> match_all(const Metagraph& space, std::span<const Expression> patterns) {
    std::vector<Bindings> acc(1);
    acc.front().attach(&space);
    for (const Expression& pattern : patterns) {
        std::vector<Bindings> next;
        for (const Bindings& partial : acc) {
            const Expression narrowed = substitute(pattern, partial);
            for (const MatchResult& m : match(space, narrowed)) {
                auto joined = Bindings::merged(partial, m.bindings);
                if (!joined) continue;
                const bool duplicate = std::ranges::any_of(next, [&](const Bindings& b) {
                    return b.entries() == joined->entries();
                });
                if (!duplicate) next.push_back(std::move(*joined));
            }
        }
        acc = std::move(next);
    }
    return acc;
}

std::vector<MatchResult> match_any(const Metagraph& space, std::span<const Expression> patterns) {
    std::vector<MatchResult> out;
    for (const Expression& pattern : patterns) {
        for (MatchResult& m : match(space, pattern)) {
            out.push_back(std::move(m));
        }
    }
    return out;
}

std::vector<Expression> transform(const Metagraph& space, const Expression& pattern,
                                  const Expression& templ) {
    const std::vector<std::string> pattern_vars = pattern.free_variables();
    for (const std::string& name : templ.free_variables()) {
        if (std::ranges::find(pattern_vars, name) == pattern_vars.end()) {
            throw TemplateVariableError("template variable $" + name +
                                        " does not occur in the pattern");
        }
    }
    std::vector<Expression> out;
    for (const MatchResult& m : match(space, pattern)) {
        out.push_back(substitute(templ, m.bindings));
    }
    return out;
}

std::vector<MatchResult> match_enriched(const Metagraph& space, const Expression& pattern,
                                        const std::string& kind, double threshold,
                                        const EnrichmentRegistry& enrichments) {
    if (!enrichments.has_kind(kind)) {
        throw UnknownKindError("unknown enrichment kind: " + kind);
    }
    if (!pattern.enrichment() || pattern.enrichment()->kind != kind) {
        throw Error("match_enriched: pattern carries no " + kind + " enrichment");
    }
    const Payload& query_payload = pattern.enrichment()->payload;
    const Expression stripped = pattern.without_enrichment();

    std::vector<MatchResult> out;
    for (MatchResult& m : match_impl(space, stripped, true, kind)) {
        const Edge& root_edge = space.get_edge(m.matched_root);
        const double p = enrichments.proximity(kind, query_payload, root_edge.enrichment->payload);
        if (p > threshold) out.push_back(std::move(m));
    }
    return out;
}

}  // namespace mgrew

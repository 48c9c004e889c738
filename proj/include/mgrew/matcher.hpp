#pragma once

#include <mgrew/enrichments.hpp>
#include <mgrew/expression.hpp>
#include <mgrew/metagraph.hpp>

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mgrew {

/// Which side a bound variable came from: the pattern being matched or the
/// target expression it was matched against. When both sides could bind, the
/// pattern variable is the one that binds.
enum class BindingSide { Pattern, Target };

struct BindingEntry {
    EdgeId referent;
    BindingSide side;

    bool operator==(const BindingEntry&) const = default;
};

/// A consistent assignment of variable names to referent edges. Referents
/// resolve against space(): the queried space itself, or a scratch layer
/// over it owned by this object when matching had to materialize
/// intermediate expressions. A variable is never bound to an edge whose
/// expression contains that variable.
class Bindings {
public:
    Bindings() = default;

    const Metagraph* space() const { return space_; }
    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }
    std::optional<BindingEntry> lookup(const std::string& name) const;
    const std::map<std::string, BindingEntry>& entries() const { return entries_; }

    /// Union of two assignments; nullopt when any shared name has different
    /// referents. Both operands must resolve against the same base space.
    static std::optional<Bindings> merged(const Bindings& a, const Bindings& b);

    void attach(const Metagraph* view, std::shared_ptr<const Metagraph> owned = nullptr);
    bool insert(const std::string& name, EdgeId referent, BindingSide side);
    void overwrite(const std::string& name, EdgeId referent, BindingSide side);

private:
    std::map<std::string, BindingEntry> entries_;
    const Metagraph* space_ = nullptr;
    std::shared_ptr<const Metagraph> owned_;
};

/// Edge map from a pattern metagraph into a host metagraph. Targets map to
/// targets as an order-preserving subsequence, symbol labels are preserved,
/// variable-labeled pattern edges are unconstrained, image types inherit
/// from pattern types, and enrichments are related by one named witness per
/// kind (recorded in `witnesses`).
struct HomomorphismMap {
    std::map<EdgeId, EdgeId> edge_map;
    std::map<std::string, std::string> witnesses;
};

struct MatchResult {
    Bindings bindings;
    EdgeId matched_root;
    HomomorphismMap hom;  // interned pattern edges -> host edges
    std::shared_ptr<const Metagraph> pattern_space;
};

struct CandidateContext {
    const Metagraph& pattern;
    const Metagraph& host;
    EdgeId pattern_edge;
    std::span<const EdgeId> candidates;
};

/// Priority for scheduling (pattern-edge, candidate-set) extensions; lower
/// runs first, ties break by pattern EdgeId.
using OrderingHeuristic = std::function<double(const CandidateContext&)>;

OrderingHeuristic label_selectivity_heuristic();
OrderingHeuristic smallest_candidate_set_heuristic();

const EnrichmentRegistry& default_enrichments();

/// The edges of a pattern space that participate in matching: everything
/// reachable from its non-(: ...) roots. Type-fact roots constrain the
/// search instead of joining the mapped pattern.
std::vector<EdgeId> pattern_domain(const Metagraph& pattern);

/// All homomorphisms from pattern into host, in lexicographic order of
/// (pattern EdgeId -> host EdgeId) assignments absent a heuristic. Type
/// constraints on both sides are evaluated against the host's inheritance
/// closure; enrichment witnesses come from the registry, with unregistered
/// kinds falling back to byte-identity.
std::vector<HomomorphismMap> find_homomorphisms(
    const Metagraph& pattern, const Metagraph& host,
    std::optional<std::size_t> limit = std::nullopt, OrderingHeuristic heuristic = nullptr,
    const EnrichmentRegistry& enrichments = default_enrichments());

bool is_valid_homomorphism(const Metagraph& pattern, const Metagraph& host,
                           const HomomorphismMap& hom,
                           const EnrichmentRegistry& enrichments = default_enrichments());

/// Most general unifier of p and e: the least binding set under which
/// substituting both sides yields structurally equal expressions. Pattern
/// variables take precedence when either side could bind. Variables with
/// declared types only bind referents whose type inherits from every
/// constraint. nullopt on clash, occurs-check violation, or type violation.
std::optional<Bindings> unify(const Expression& p, const Expression& e, const Metagraph& space);

/// Replaces every bound variable by its referent's expression, leaving
/// unbound variables and all other structure intact.
Expression substitute(const Expression& expr, const Bindings& bindings);

/// One result per root of the space that pattern matches: bindings over the
/// pattern's variables under which substitute(pattern, bindings) is
/// structurally equal to the root. Ordered by root EdgeId. Intermediate
/// expressions go to a per-call scratch layer, never into the queried space.
std::vector<MatchResult> match(const Metagraph& space, const Expression& pattern);

/// Conjunction: bindings satisfying every pattern at once, joined left to
/// right. Disjunction: per-branch results concatenated in branch order.
std::vector<Bindings> match_all(const Metagraph& space, std::span<const Expression> patterns);
std::vector<MatchResult> match_any(const Metagraph& space, std::span<const Expression> patterns);

/// One instantiated template per match of pattern, in match order. Every
/// free variable of templ must occur in pattern (TemplateVariableError).
std::vector<Expression> transform(const Metagraph& space, const Expression& pattern,
                                  const Expression& templ);

/// match() restricted to roots enriched with `kind`, keeping those whose
/// payload proximity to the pattern's own enrichment strictly exceeds the
/// threshold. Root-level enrichments are ignored during the structural
/// phase. The pattern must carry a `kind` enrichment at its root.
std::vector<MatchResult> match_enriched(const Metagraph& space, const Expression& pattern,
                                        const std::string& kind, double threshold,
                                        const EnrichmentRegistry& enrichments = default_enrichments());

}  // namespace mgrew

#pragma once

#include <mgrew/matcher.hpp>
#include <mgrew/metagraph.hpp>

#include <map>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

namespace mgrew {

/// Single-pushout rule: pattern L, replacement R, and a partial injective
/// preservation map r from L-edges to R-edges. L-edges outside dom(r) are
/// deleted (with automatic disposal of anything left dangling); R-edges
/// outside range(r) are created.
struct SPORule {
    Metagraph left;
    Metagraph right;
    std::map<EdgeId, EdgeId> preserve;
};

/// Double-pushout rule (L, K, R) with total injective embeddings
/// l: K -> L and k: K -> R. L \ l(K) is the delete-set, R \ k(K) the
/// create-set; application requires the gluing condition.
struct DPORule {
    Metagraph left;
    Metagraph interface;
    Metagraph right;
    std::map<EdgeId, EdgeId> to_left;
    std::map<EdgeId, EdgeId> to_right;
};

using Rule = std::variant<SPORule, DPORule>;

/// Why a DPO application was refused. The host is untouched in either case.
struct GluingViolation {
    enum class Reason { Dangling, Identification };

    Reason reason;
    std::vector<EdgeId> offenders;  // dangling host edges, or images merged by m
};

/// One direct derivation. The host is never mutated: `result` is a fresh
/// graph. host_map (rho) is defined exactly on surviving host edges;
/// replacement_map (mu) covers every created edge and every preserved image
/// that survived.
struct Derivation {
    HomomorphismMap match;
    Metagraph result;
    std::map<EdgeId, EdgeId> host_map;
    std::map<EdgeId, EdgeId> replacement_map;
    std::optional<Metagraph> intermediate;  // D, DPO only
};

void validate_rule(const SPORule& rule);  // throws RuleFormatError
void validate_rule(const DPORule& rule);

/// Applies an SPO rule at a match. Never fails on a valid match: deletion
/// cascades to edges left dangling, and created edges glue onto existing
/// structure through hash-consing. Throws InvalidMatchError when m does not
/// re-validate as a homomorphism L -> host.
Derivation apply_spo(const Metagraph& host, const SPORule& rule, const HomomorphismMap& m,
                     const EnrichmentRegistry& enrichments = default_enrichments());

/// Applies a DPO rule at a match, first checking the gluing condition:
/// deleting m(L \ l(K)) must leave no edge dangling, and m must not identify
/// a deleted item with a preserved one. On success the Derivation carries
/// the intermediate graph D.
std::variant<Derivation, GluingViolation> apply_dpo(
    const Metagraph& host, const DPORule& rule, const HomomorphismMap& m,
    const EnrichmentRegistry& enrichments = default_enrichments());

std::vector<HomomorphismMap> find_rule_matches(
    const Metagraph& host, const SPORule& rule,
    const EnrichmentRegistry& enrichments = default_enrichments());
std::vector<HomomorphismMap> find_rule_matches(
    const Metagraph& host, const DPORule& rule,
    const EnrichmentRegistry& enrichments = default_enrichments());

/// One Derivation per match, in match order; DPO matches failing the gluing
/// condition are skipped.
std::vector<Derivation> derive_all(const Metagraph& host, const SPORule& rule,
                                   const EnrichmentRegistry& enrichments = default_enrichments());
std::vector<Derivation> derive_all(const Metagraph& host, const DPORule& rule,
                                   const EnrichmentRegistry& enrichments = default_enrichments());

/// Rule file format, in the space text syntax:
///   (!rule spo <L-expr> <R-expr> <pairs>)
///   (!rule dpo <L-expr> <K-expr> <R-expr> <l-pairs> <k-pairs>)
/// where <pairs> is a list of two-path lists naming sub-expressions by child
/// indices from the root, e.g. (((0) (0)) ((1) (1))); () names the root.
/// SPO pairs run L -> R, l-pairs K -> L, k-pairs K -> R.
std::vector<Rule> load_rules(std::string_view text);
Rule parse_rule(const Expression& directive);

}  // namespace mgrew

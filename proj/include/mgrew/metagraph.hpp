#pragma once

#include <mgrew/edge.hpp>
#include <mgrew/expression.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>
#include <vector>

namespace mgrew {

enum class RemovePolicy {
    Cascade,             // also removes, transitively, every edge whose targets mention a removed edge
    ForbidIfReferenced,  // succeeds only when nothing lists the edge among its targets
};

/// Deduplicated edge store. Two structurally identical edges (same label,
/// same target sequence, same enrichment) never coexist; inserting a
/// duplicate returns the existing id. Root membership marks the top-level
/// expressions of the space.
///
/// A scratch store created with scratch_over() layers private edges on top
/// of a frozen base: reads see the union, writes stay local, and ids remain
/// unique across both. Intermediate expressions produced by matching and
/// evaluation live in such scratch layers and never touch the base space.
///
/// Concurrency: single writer, multiple readers per store. Edges are values;
/// snapshots obtained from get_edge/lift are safe to move between threads.
class Metagraph {
public:
    Metagraph();
    static Metagraph scratch_over(const Metagraph& base);

    Metagraph(const Metagraph& other);
    Metagraph& operator=(const Metagraph& other);
    Metagraph(Metagraph&&) noexcept = default;
    Metagraph& operator=(Metagraph&&) noexcept = default;

    // -- growth ------------------------------------------------------------

    /// Hash-conses every sub-expression bottom-up and marks the result a root.
    /// Idempotent: re-adding a structurally equal expression returns the same
    /// id and leaves the edge count unchanged.
    EdgeId add_expression(const Expression& expr);

    /// Like add_expression but without root marking.
    EdgeId intern(const Expression& expr);

    /// Low-level hash-consed insertion. All targets must already exist.
    EdgeId add_edge(const Label& label, std::vector<EdgeId> targets,
                    std::optional<Enrichment> enrichment = std::nullopt);

    void mark_root(EdgeId id);

    // -- removal -----------------------------------------------------------

    /// Returns every id removed, in ascending order. Cascade tolerates cyclic
    /// stores. ForbidIfReferenced throws ReferencedError when the edge still
    /// has referrers.
    std::vector<EdgeId> remove_edge(EdgeId id, RemovePolicy policy);

    /// Rewrites an edge in place and repairs the dedup invariant: if the new
    /// shape collides with an existing edge the two are merged (referrers are
    /// retargeted, which may trigger further merges). Returns the surviving
    /// id; every merge performed is appended to *remap when given.
    /// Not available on scratch stores.
    EdgeId replace_edge(EdgeId id, const Label& label, std::vector<EdgeId> targets,
                        std::optional<Enrichment> enrichment,
                        std::map<EdgeId, EdgeId>* remap = nullptr);

    // -- queries -----------------------------------------------------------

    bool contains(EdgeId id) const;
    const Edge& get_edge(EdgeId id) const;  // throws UnknownEdgeError
    std::optional<EdgeId> find(const Expression& expr) const;

    /// Rebuilds the expression tree rooted at id. Throws on cyclic structure.
    Expression lift(EdgeId id) const;

    /// Exactly the edges listing id among their targets, ascending.
    std::vector<EdgeId> incident(EdgeId id) const;  // throws UnknownEdgeError

    std::vector<EdgeId> edges_with_label(const Label& label) const;
    std::vector<EdgeId> roots() const;  // ascending
    bool is_root(EdgeId id) const;
    std::vector<EdgeId> edge_ids() const;  // ascending, base included
    std::size_t edge_count() const;        // base included

    bool is_scratch() const { return base_ != nullptr; }
    const Metagraph* base() const { return base_; }

    /// Bumped on every mutation; (store_id, revision) identifies a store
    /// state for caching.
    std::uint64_t revision() const { return revision_; }
    std::uint64_t store_id() const { return store_id_; }

    /// Recomputes all indices from the edge set and compares; throws Error on
    /// any inconsistency (index drift, dangling target, stray root).
    void validate() const;

private:
    struct StructKey {
        Label label;
        std::vector<EdgeId> targets;
        std::optional<Enrichment> enrichment;

        bool operator==(const StructKey&) const = default;
    };
    struct StructKeyHash {
        std::size_t operator()(const StructKey& key) const;
    };

    static StructKey key_of(const Edge& edge);
    EdgeId insert_new(const Label& label, std::vector<EdgeId> targets,
                      std::optional<Enrichment> enrichment);
    std::optional<EdgeId> find_structural(const StructKey& key) const;
    const Edge* lookup(EdgeId id) const;
    void index_edge(const Edge& edge);
    void deindex_edge(const Edge& edge);
    EdgeId merge_into(EdgeId loser, EdgeId winner, std::map<EdgeId, EdgeId>* remap);
    void bump() { ++revision_; }

    const Metagraph* base_ = nullptr;
    std::map<EdgeId, Edge> edges_;
    std::unordered_map<StructKey, EdgeId, StructKeyHash> structural_;
    std::map<Label, std::set<EdgeId>> by_label_;
    std::unordered_map<EdgeId, std::set<EdgeId>> incidence_;
    std::set<EdgeId> roots_;
    std::uint64_t next_id_ = 1;
    std::uint64_t revision_ = 0;
    std::uint64_t store_id_ = 0;
};

}  // namespace mgrew

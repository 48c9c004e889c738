#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mgrew {

/// Stable identity of an edge within one store lifetime. Ids are assigned in
/// insertion order and never recycled, so their total order is deterministic
/// for a fixed insertion sequence and is used for tie-breaking everywhere.
struct EdgeId {
    std::uint64_t value = 0;

    auto operator<=>(const EdgeId&) const = default;
};

enum class LabelKind {
    Symbol,    // constant ungrounded symbol
    Variable,  // written $name in the surface syntax
    Grounded,  // written &name; resolved in the grounding registry at apply time
    List,      // label of a non-leaf expression edge
};

/// Edge label. Variable names never compare equal to symbol names of the
/// same spelling: the kind participates in every comparison.
class Label {
public:
    static Label symbol(std::string name);
    static Label variable(std::string name);
    static Label grounded(std::string name);
    static Label list();

    LabelKind kind() const { return kind_; }
    const std::string& name() const { return name_; }  // empty for List

    bool is_symbol() const { return kind_ == LabelKind::Symbol; }
    bool is_variable() const { return kind_ == LabelKind::Variable; }
    bool is_grounded() const { return kind_ == LabelKind::Grounded; }
    bool is_list() const { return kind_ == LabelKind::List; }

    auto operator<=>(const Label&) const = default;

private:
    Label(LabelKind kind, std::string name) : kind_(kind), name_(std::move(name)) {}

    LabelKind kind_;
    std::string name_;
};

/// Non-type payload attached to an edge (e.g. an embedding vector).
/// The kind names an entry in the enrichment registry; the payload is
/// opaque bytes whose meaning belongs to that kind.
struct Enrichment {
    std::string kind;
    std::vector<std::uint8_t> payload;

    auto operator<=>(const Enrichment&) const = default;
};

/// The universal unit of the metagraph. An edge with no targets is a vertex
/// (degenerate edge); targets are ordered and order is significant.
struct Edge {
    EdgeId id;
    Label label;
    std::vector<EdgeId> targets;
    std::optional<Enrichment> enrichment;

    bool is_vertex() const { return targets.empty(); }
};

inline Label Label::symbol(std::string name) { return Label(LabelKind::Symbol, std::move(name)); }
inline Label Label::variable(std::string name) { return Label(LabelKind::Variable, std::move(name)); }
inline Label Label::grounded(std::string name) { return Label(LabelKind::Grounded, std::move(name)); }
inline Label Label::list() { return Label(LabelKind::List, {}); }

}  // namespace mgrew

template <>
struct std::hash<mgrew::EdgeId> {
    std::size_t operator()(const mgrew::EdgeId& id) const noexcept {
        return std::hash<std::uint64_t>{}(id.value);
    }
};

#pragma once

#include <mgrew/edge.hpp>

#include <compare>
#include <span>
#include <string>
#include <vector>

namespace mgrew {

/// Tree view over edges: a leaf carries a symbol/variable/grounded label, a
/// list carries ordered children. Any node may additionally carry an
/// enrichment, which survives lowering into a store and lifting back.
///
/// Expressions are immutable values; all comparison is structural and
/// includes enrichments.
class Expression {
public:
    static Expression symbol(std::string name);
    static Expression variable(std::string name);  // name without the leading '$'
    static Expression grounded(std::string name);  // name without the leading '&'
    static Expression list(std::vector<Expression> children);

    bool is_leaf() const { return !label_.is_list(); }
    bool is_list() const { return label_.is_list(); }

    const Label& label() const { return label_; }
    std::span<const Expression> children() const { return children_; }
    const Expression& child(std::size_t i) const { return children_[i]; }
    std::size_t size() const { return children_.size(); }

    const std::optional<Enrichment>& enrichment() const { return enrichment_; }
    Expression with_enrichment(Enrichment enr) const;
    Expression without_enrichment() const;

    /// True for a leaf labeled with a variable.
    bool is_variable() const { return label_.is_variable(); }

    /// Collects the distinct variable names occurring anywhere in the tree,
    /// in first-occurrence order.
    std::vector<std::string> free_variables() const;
    bool contains_variable(const std::string& name) const;

    /// Renders the surface syntax. Symbol names that cannot stand as bare
    /// tokens are emitted as quoted string literals; enriched nodes are
    /// emitted through the !enrich reader directive. parse(to_text(e)) == e.
    std::string to_text() const;

    bool operator==(const Expression& other) const;
    std::strong_ordering operator<=>(const Expression& other) const;

private:
    Expression(Label label, std::vector<Expression> children)
        : label_(std::move(label)), children_(std::move(children)) {}

    Label label_;
    std::vector<Expression> children_;
    std::optional<Enrichment> enrichment_;
};

/// True when `name` can be written as a bare token: non-empty, free of
/// whitespace and ( ) " ; \ characters, and not starting with $ & or !.
bool is_bare_token(const std::string& name);

}  // namespace mgrew

#include <mgrew/types.hpp>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <string>

namespace mgrew {

bool is_type_fact(const Metagraph& space, const Edge& edge) {
    if (!edge.label.is_list() || edge.targets.size() != 3) return false;
    const Edge& head = space.get_edge(edge.targets[0]);
    return head.label.is_symbol() && head.label.name() == ":" && head.targets.empty();
}

namespace {

const std::string kTypeKeyword = "Type";

std::vector<Edge> type_facts(const Metagraph& space) {
    std::vector<Edge> facts;
    for (const EdgeId& root : space.roots()) {
        const Edge& edge = space.get_edge(root);
        if (is_type_fact(space, edge)) facts.push_back(edge);
    }
    return facts;
}

/// Reflexive-transitive closure over declared types, keyed by canonical
/// expression text.
struct TypeClosure {
    std::map<std::string, std::size_t> index;
    std::vector<std::vector<bool>> reach;

    bool holds(const std::string& from, const std::string& to) const {
        if (from == to) return true;
        auto a = index.find(from);
        auto b = index.find(to);
        if (a == index.end() || b == index.end()) return false;
        return reach[a->second][b->second];
    }
};

TypeClosure compute_closure(const Metagraph& space) {
    const std::vector<Edge> facts = type_facts(space);

    TypeClosure closure;
    closure.index.emplace(kTypeKeyword, 0);
    auto declare = [&](const std::string& text) {
        closure.index.emplace(text, closure.index.size());
    };
    for (const Edge& fact : facts) {
        const Expression type_expr = space.lift(fact.targets[2]);
        if (type_expr.is_leaf() && type_expr.label().is_symbol() &&
            type_expr.label().name() == kTypeKeyword) {
            declare(space.lift(fact.targets[1]).to_text());
        }
    }

    const std::size_t n = closure.index.size();
    closure.reach.assign(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i) closure.reach[i][i] = true;
    for (const Edge& fact : facts) {
        auto sub = closure.index.find(space.lift(fact.targets[1]).to_text());
        auto super = closure.index.find(space.lift(fact.targets[2]).to_text());
        if (sub != closure.index.end() && super != closure.index.end()) {
            closure.reach[sub->second][super->second] = true;
        }
    }
    // Floyd-Warshall; type graphs stay small.
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!closure.reach[i][k]) continue;
            for (std::size_t j = 0; j < n; ++j) {
                if (closure.reach[k][j]) closure.reach[i][j] = true;
            }
        }
    }
    return closure;
}

struct ClosureCacheKey {
    std::uint64_t store;
    std::uint64_t revision;
    std::uint64_t base_store;
    std::uint64_t base_revision;

    auto operator<=>(const ClosureCacheKey&) const = default;
};

std::shared_ptr<const TypeClosure> closure_for(const Metagraph& space) {
    static std::mutex mutex;
    static std::map<std::uint64_t, std::pair<ClosureCacheKey, std::shared_ptr<const TypeClosure>>>
        cache;

    const ClosureCacheKey key{space.store_id(), space.revision(),
                              space.base() ? space.base()->store_id() : 0,
                              space.base() ? space.base()->revision() : 0};
    {
        std::scoped_lock lock(mutex);
        auto it = cache.find(key.store);
        if (it != cache.end() && it->second.first == key) return it->second.second;
    }
    auto closure = std::make_shared<const TypeClosure>(compute_closure(space));
    {
        std::scoped_lock lock(mutex);
        if (cache.size() > 1024) cache.clear();
        cache[key.store] = {key, closure};
    }
    return closure;
}

bool is_arrow(const Expression& type) {
    return type.is_list() && type.size() >= 3 && type.child(0).is_leaf() &&
           type.child(0).label().is_symbol() && type.child(0).label().name() == "->";
}

}  // namespace

std::vector<Expression> types_of(const Metagraph& space, EdgeId id) {
    space.get_edge(id);  // unknown-id check
    std::vector<Expression> types;
    for (const EdgeId& root : space.roots()) {
        const Edge& edge = space.get_edge(root);
        if (is_type_fact(space, edge) && edge.targets[1] == id) {
            Expression type = space.lift(edge.targets[2]);
            if (std::ranges::find(types, type) == types.end()) {
                types.push_back(std::move(type));
            }
        }
    }
    return types;
}

std::vector<Expression> types_of_expression(const Metagraph& space, const Expression& expr) {
    auto id = space.find(expr);
    if (!id) return {};
    return types_of(space, *id);
}

bool inherits(const Metagraph& space, const Expression& t1, const Expression& t2) {
    if (t1 == t2) return true;
    return closure_for(space)->holds(t1.to_text(), t2.to_text());
}

ApplicationCheck check_application(const Metagraph& space, EdgeId fn, EdgeId arg) {
    std::vector<Expression> arrows;
    for (const Expression& type : types_of(space, fn)) {
        if (is_arrow(type)) arrows.push_back(type);
    }
    if (arrows.empty()) return ApplicationCheck::undefined();

    const std::vector<Expression> arg_types = types_of(space, arg);
    if (arg_types.empty()) return ApplicationCheck::undefined();

    for (const Expression& arrow : arrows) {
        const Expression& param = arrow.child(1);
        const bool accepted = std::ranges::any_of(arg_types, [&](const Expression& arg_type) {
            return inherits(space, arg_type, param);
        });
        if (!accepted) continue;
        if (arrow.size() == 3) return ApplicationCheck::result(arrow.child(2));
        // Curried remainder: (-> A B C) applied once yields (-> B C).
        std::vector<Expression> rest{Expression::symbol("->")};
        for (std::size_t i = 2; i < arrow.size(); ++i) rest.push_back(arrow.child(i));
        return ApplicationCheck::result(Expression::list(std::move(rest)));
    }
    return ApplicationCheck::type_error();
}

}  // namespace mgrew

#include <mgrew/metagraph.hpp>

#include <mgrew/errors.hpp>

#include <algorithm>
#include <atomic>
#include <deque>
#include <unordered_set>

namespace mgrew {

namespace {

std::uint64_t fresh_store_id() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1);
}

void hash_combine(std::size_t& seed, std::size_t value) {
    seed ^= value + 0x9e3779b97f4a7c15ull + (seed << 6) + (seed >> 2);
}

}  // namespace

std::size_t Metagraph::StructKeyHash::operator()(const StructKey& key) const {
    std::size_t seed = static_cast<std::size_t>(key.label.kind());
    hash_combine(seed, std::hash<std::string>{}(key.label.name()));
    for (const EdgeId& t : key.targets) {
        hash_combine(seed, std::hash<std::uint64_t>{}(t.value));
    }
    if (key.enrichment) {
        hash_combine(seed, std::hash<std::string>{}(key.enrichment->kind));
        std::size_t payload_hash = key.enrichment->payload.size();
        for (std::uint8_t b : key.enrichment->payload) {
            hash_combine(payload_hash, b);
        }
        hash_combine(seed, payload_hash);
    }
    return seed;
}

Metagraph::Metagraph() : store_id_(fresh_store_id()) {}

Metagraph Metagraph::scratch_over(const Metagraph& base) {
    Metagraph scratch;
    scratch.base_ = &base;
    scratch.next_id_ = base.next_id_;
    return scratch;
}

// Copies get a fresh store identity so cached derived data (e.g. type
// closures) can never alias across independently mutating copies.
Metagraph::Metagraph(const Metagraph& other)
    : base_(other.base_),
      edges_(other.edges_),
      structural_(other.structural_),
      by_label_(other.by_label_),
      incidence_(other.incidence_),
      roots_(other.roots_),
      next_id_(other.next_id_),
      revision_(other.revision_),
      store_id_(fresh_store_id()) {}

Metagraph& Metagraph::operator=(const Metagraph& other) {
    if (this != &other) {
        base_ = other.base_;
        edges_ = other.edges_;
        structural_ = other.structural_;
        by_label_ = other.by_label_;
        incidence_ = other.incidence_;
        roots_ = other.roots_;
        next_id_ = other.next_id_;
        revision_ = other.revision_;
        store_id_ = fresh_store_id();
    }
    return *this;
}

Metagraph::StructKey Metagraph::key_of(const Edge& edge) {
    return StructKey{edge.label, edge.targets, edge.enrichment};
}

const Edge* Metagraph::lookup(EdgeId id) const {
    auto it = edges_.find(id);
    if (it != edges_.end()) return &it->second;
    if (base_) return base_->lookup(id);
    return nullptr;
}

bool Metagraph::contains(EdgeId id) const {
    return lookup(id) != nullptr;
}

const Edge& Metagraph::get_edge(EdgeId id) const {
    const Edge* edge = lookup(id);
    if (!edge) {
        throw UnknownEdgeError("unknown edge id " + std::to_string(id.value));
    }
    return *edge;
}

std::optional<EdgeId> Metagraph::find_structural(const StructKey& key) const {
    if (base_) {
        if (auto id = base_->find_structural(key)) return id;
    }
    auto it = structural_.find(key);
    if (it != structural_.end()) return it->second;
    return std::nullopt;
}

void Metagraph::index_edge(const Edge& edge) {
    structural_.emplace(key_of(edge), edge.id);
    by_label_[edge.label].insert(edge.id);
    for (const EdgeId& t : edge.targets) {
        incidence_[t].insert(edge.id);
    }
}

void Metagraph::deindex_edge(const Edge& edge) {
    structural_.erase(key_of(edge));
    auto label_it = by_label_.find(edge.label);
    if (label_it != by_label_.end()) {
        label_it->second.erase(edge.id);
        if (label_it->second.empty()) by_label_.erase(label_it);
    }
    for (const EdgeId& t : edge.targets) {
        auto inc_it = incidence_.find(t);
        if (inc_it != incidence_.end()) {
            inc_it->second.erase(edge.id);
            if (inc_it->second.empty()) incidence_.erase(inc_it);
        }
    }
}

EdgeId Metagraph::insert_new(const Label& label, std::vector<EdgeId> targets,
                             std::optional<Enrichment> enrichment) {
    Edge edge{EdgeId{next_id_++}, label, std::move(targets), std::move(enrichment)};
    const EdgeId id = edge.id;
    index_edge(edge);
    edges_.emplace(id, std::move(edge));
    bump();
    return id;
}

EdgeId Metagraph::add_edge(const Label& label, std::vector<EdgeId> targets,
                           std::optional<Enrichment> enrichment) {
    for (const EdgeId& t : targets) {
        if (!contains(t)) {
            throw UnknownEdgeError("add_edge target does not exist: " + std::to_string(t.value));
        }
    }
    StructKey key{label, targets, enrichment};
    if (auto existing = find_structural(key)) return *existing;
    return insert_new(label, std::move(targets), std::move(enrichment));
}

EdgeId Metagraph::intern(const Expression& expr) {
    std::vector<EdgeId> targets;
    targets.reserve(expr.size());
    for (const Expression& child : expr.children()) {
        targets.push_back(intern(child));
    }
    return add_edge(expr.label(), std::move(targets), expr.enrichment());
}

EdgeId Metagraph::add_expression(const Expression& expr) {
    const EdgeId id = intern(expr);
    mark_root(id);
    return id;
}

void Metagraph::mark_root(EdgeId id) {
    if (!contains(id)) {
        throw UnknownEdgeError("cannot mark unknown edge as root");
    }
    if (base_ && base_->is_root(id)) return;
    if (roots_.insert(id).second) bump();
}

std::vector<EdgeId> Metagraph::remove_edge(EdgeId id, RemovePolicy policy) {
    if (!contains(id)) {
        throw UnknownEdgeError("unknown edge id " + std::to_string(id.value));
    }
    if (base_ && base_->contains(id)) {
        throw Error("cannot remove an edge owned by the base space");
    }
    if (policy == RemovePolicy::ForbidIfReferenced) {
        if (!incident(id).empty()) {
            throw ReferencedError("edge " + std::to_string(id.value) + " is still referenced");
        }
        const Edge edge = edges_.at(id);
        deindex_edge(edge);
        edges_.erase(id);
        roots_.erase(id);
        bump();
        return {id};
    }
    // Cascade: close upward over the incidence relation. A visited set keeps
    // this terminating on cyclic stores.
    std::set<EdgeId> removed;
    std::deque<EdgeId> queue{id};
    while (!queue.empty()) {
        const EdgeId current = queue.front();
        queue.pop_front();
        if (!removed.insert(current).second) continue;
        for (const EdgeId& referrer : incident(current)) {
            if (!removed.contains(referrer)) queue.push_back(referrer);
        }
    }
    for (const EdgeId& victim : removed) {
        auto it = edges_.find(victim);
        if (it == edges_.end()) {
            throw Error("cascade removal crossed into the base space");
        }
        deindex_edge(it->second);
        edges_.erase(it);
        roots_.erase(victim);
    }
    bump();
    return {removed.begin(), removed.end()};
}

EdgeId Metagraph::replace_edge(EdgeId id, const Label& label, std::vector<EdgeId> targets,
                               std::optional<Enrichment> enrichment,
                               std::map<EdgeId, EdgeId>* remap) {
    if (base_) {
        throw Error("replace_edge is not available on scratch stores");
    }
    auto it = edges_.find(id);
    if (it == edges_.end()) {
        throw UnknownEdgeError("unknown edge id " + std::to_string(id.value));
    }
    for (const EdgeId& t : targets) {
        if (!contains(t)) {
            throw UnknownEdgeError("replace_edge target does not exist: " + std::to_string(t.value));
        }
    }
    deindex_edge(it->second);
    it->second.label = label;
    it->second.targets = std::move(targets);
    it->second.enrichment = std::move(enrichment);

    StructKey key = key_of(it->second);
    auto collision = structural_.find(key);
    if (collision != structural_.end() && collision->second != id) {
        const EdgeId winner = collision->second;
        // Leave the loser deindexed; merge_into disposes of it.
        bump();
        return merge_into(id, winner, remap);
    }
    index_edge(it->second);
    bump();
    return id;
}

// Redirects every referrer of `loser` to `winner`, removes `loser`, and
// repairs any further structural collisions this causes. The edge count
// strictly decreases per merge, so the loop terminates even on cycles.
EdgeId Metagraph::merge_into(EdgeId loser, EdgeId winner, std::map<EdgeId, EdgeId>* remap) {
    std::map<EdgeId, EdgeId> merged;
    auto resolve = [&merged](EdgeId id) {
        while (true) {
            auto it = merged.find(id);
            if (it == merged.end()) return id;
            id = it->second;
        }
    };
    std::deque<std::pair<EdgeId, EdgeId>> pending{{loser, winner}};
    while (!pending.empty()) {
        auto [from, to] = pending.front();
        pending.pop_front();
        to = resolve(to);
        auto from_it = edges_.find(from);
        if (from_it == edges_.end()) continue;

        const std::vector<EdgeId> referrers = incident(from);
        for (const EdgeId& ref : referrers) {
            auto ref_it = edges_.find(ref);
            if (ref_it == edges_.end()) continue;
            deindex_edge(ref_it->second);
            for (EdgeId& t : ref_it->second.targets) {
                if (t == from) t = to;
            }
            StructKey ref_key = key_of(ref_it->second);
            auto ref_collision = structural_.find(ref_key);
            if (ref_collision != structural_.end() && ref_collision->second != ref) {
                // Retargeting collapsed this referrer onto an existing edge;
                // queue the secondary merge. Keep `ref` reachable through the
                // label and incidence indices until its entry is processed.
                pending.emplace_back(ref, ref_collision->second);
                by_label_[ref_it->second.label].insert(ref);
                for (const EdgeId& t : ref_it->second.targets) {
                    incidence_[t].insert(ref);
                }
            } else {
                index_edge(ref_it->second);
            }
        }

        if (is_root(from)) roots_.insert(to);
        roots_.erase(from);
        // Dispose of the loser; its structural slot may legitimately point at
        // the winner by now, so only erase entries that still name it.
        auto current = edges_.find(from);
        if (current != edges_.end()) {
            auto label_it = by_label_.find(current->second.label);
            if (label_it != by_label_.end()) {
                label_it->second.erase(from);
                if (label_it->second.empty()) by_label_.erase(label_it);
            }
            for (const EdgeId& t : current->second.targets) {
                auto inc_it = incidence_.find(t);
                if (inc_it != incidence_.end()) {
                    inc_it->second.erase(from);
                    if (inc_it->second.empty()) incidence_.erase(inc_it);
                }
            }
            auto struct_it = structural_.find(key_of(current->second));
            if (struct_it != structural_.end() && struct_it->second == from) {
                structural_.erase(struct_it);
            }
            edges_.erase(current);
        }
        merged.emplace(from, to);
    }
    if (remap) {
        for (const auto& [from, to] : merged) remap->emplace(from, resolve(to));
    }
    bump();
    return resolve(winner);
}

std::optional<EdgeId> Metagraph::find(const Expression& expr) const {
    std::vector<EdgeId> targets;
    targets.reserve(expr.size());
    for (const Expression& child : expr.children()) {
        auto child_id = find(child);
        if (!child_id) return std::nullopt;
        targets.push_back(*child_id);
    }
    return find_structural(StructKey{expr.label(), std::move(targets), expr.enrichment()});
}

Expression Metagraph::lift(EdgeId id) const {
    std::unordered_set<EdgeId> path;
    auto build = [&](auto&& self, EdgeId current) -> Expression {
        if (path.contains(current)) {
            throw Error("cannot lift cyclic structure at edge " + std::to_string(current.value));
        }
        const Edge& edge = get_edge(current);
        if (edge.label.is_list()) {
            path.insert(current);
            std::vector<Expression> children;
            children.reserve(edge.targets.size());
            for (const EdgeId& t : edge.targets) {
                children.push_back(self(self, t));
            }
            path.erase(current);
            Expression expr = Expression::list(std::move(children));
            return edge.enrichment ? expr.with_enrichment(*edge.enrichment) : expr;
        }
        if (!edge.targets.empty()) {
            // Leaf-labeled edges with targets can arise from rewriting; view
            // them as a list headed by the label's leaf form.
            path.insert(current);
            std::vector<Expression> children;
            children.reserve(edge.targets.size() + 1);
            switch (edge.label.kind()) {
                case LabelKind::Symbol:
                    children.push_back(Expression::symbol(edge.label.name()));
                    break;
                case LabelKind::Variable:
                    children.push_back(Expression::variable(edge.label.name()));
                    break;
                case LabelKind::Grounded:
                    children.push_back(Expression::grounded(edge.label.name()));
                    break;
                case LabelKind::List:
                    break;
            }
            for (const EdgeId& t : edge.targets) {
                children.push_back(self(self, t));
            }
            path.erase(current);
            Expression expr = Expression::list(std::move(children));
            return edge.enrichment ? expr.with_enrichment(*edge.enrichment) : expr;
        }
        Expression expr = [&] {
            switch (edge.label.kind()) {
                case LabelKind::Symbol:
                    return Expression::symbol(edge.label.name());
                case LabelKind::Variable:
                    return Expression::variable(edge.label.name());
                case LabelKind::Grounded:
                    return Expression::grounded(edge.label.name());
                case LabelKind::List:
                    return Expression::list({});
            }
            throw Error("unreachable label kind");
        }();
        return edge.enrichment ? expr.with_enrichment(*edge.enrichment) : expr;
    };
    return build(build, id);
}

std::vector<EdgeId> Metagraph::incident(EdgeId id) const {
    if (!contains(id)) {
        throw UnknownEdgeError("unknown edge id " + std::to_string(id.value));
    }
    std::set<EdgeId> result;
    if (base_) {
        for (const EdgeId& e : base_->incident(id)) result.insert(e);
    }
    auto it = incidence_.find(id);
    if (it != incidence_.end()) {
        result.insert(it->second.begin(), it->second.end());
    }
    return {result.begin(), result.end()};
}

std::vector<EdgeId> Metagraph::edges_with_label(const Label& label) const {
    std::set<EdgeId> result;
    if (base_) {
        for (const EdgeId& e : base_->edges_with_label(label)) result.insert(e);
    }
    auto it = by_label_.find(label);
    if (it != by_label_.end()) {
        result.insert(it->second.begin(), it->second.end());
    }
    return {result.begin(), result.end()};
}

std::vector<EdgeId> Metagraph::roots() const {
    std::set<EdgeId> result;
    if (base_) {
        for (const EdgeId& r : base_->roots()) result.insert(r);
    }
    result.insert(roots_.begin(), roots_.end());
    return {result.begin(), result.end()};
}

bool Metagraph::is_root(EdgeId id) const {
    if (roots_.contains(id)) return true;
    return base_ && base_->is_root(id);
}

std::vector<EdgeId> Metagraph::edge_ids() const {
    std::vector<EdgeId> result;
    if (base_) result = base_->edge_ids();
    result.reserve(result.size() + edges_.size());
    for (const auto& [id, edge] : edges_) result.push_back(id);
    std::ranges::sort(result);
    return result;
}

std::size_t Metagraph::edge_count() const {
    return edges_.size() + (base_ ? base_->edge_count() : 0);
}

void Metagraph::validate() const {
    std::unordered_map<StructKey, EdgeId, StructKeyHash> expect_structural;
    std::map<Label, std::set<EdgeId>> expect_by_label;
    std::unordered_map<EdgeId, std::set<EdgeId>> expect_incidence;
    for (const auto& [id, edge] : edges_) {
        if (edge.id != id) throw Error("validate: edge id mismatch");
        if (id.value >= next_id_) throw Error("validate: edge id beyond id counter");
        auto [_, inserted] = expect_structural.emplace(key_of(edge), id);
        if (!inserted) throw Error("validate: duplicate structural edge");
        expect_by_label[edge.label].insert(id);
        for (const EdgeId& t : edge.targets) {
            if (!contains(t)) {
                throw Error("validate: dangling target " + std::to_string(t.value));
            }
            expect_incidence[t].insert(id);
        }
    }
    if (expect_structural != structural_) throw Error("validate: structural index drift");
    if (expect_by_label != by_label_) throw Error("validate: label index drift");
    if (expect_incidence != incidence_) throw Error("validate: incidence index drift");
    for (const EdgeId& r : roots_) {
        if (!contains(r)) throw Error("validate: root is not an edge");
    }
}

}  // namespace mgrew

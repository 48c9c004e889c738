#include <mgrew/rewrite.hpp>

#include <mgrew/errors.hpp>
#include <mgrew/reader.hpp>

#include <algorithm>
#include <set>

namespace mgrew {

namespace {

EdgeId resolve_through(const std::map<EdgeId, EdgeId>& remap, EdgeId id) {
    while (true) {
        auto it = remap.find(id);
        if (it == remap.end()) return id;
        id = it->second;
    }
}

/// Topological order (targets first) over a set of edges, ascending ids
/// among ready edges. Edges whose targets lie outside the set are treated as
/// ready with respect to those targets.
std::vector<EdgeId> creation_order(const Metagraph& space, const std::set<EdgeId>& edges) {
    std::vector<EdgeId> order;
    std::set<EdgeId> placed;
    while (order.size() < edges.size()) {
        bool advanced = false;
        for (const EdgeId& id : edges) {
            if (placed.contains(id)) continue;
            const Edge& edge = space.get_edge(id);
            const bool ready = std::ranges::all_of(edge.targets, [&](const EdgeId& t) {
                return !edges.contains(t) || placed.contains(t);
            });
            if (ready) {
                order.push_back(id);
                placed.insert(id);
                advanced = true;
            }
        }
        if (!advanced) {
            throw RuleFormatError("replacement graph has cyclic create-set");
        }
    }
    return order;
}

/// Positions of the greedy order-preserving embedding of the mapped pattern
/// targets into the host target list.
std::optional<std::vector<std::size_t>> alignment_positions(
    const Edge& pattern_edge, const Edge& host_edge, const std::map<EdgeId, EdgeId>& edge_map) {
    std::vector<std::size_t> positions;
    std::size_t host_pos = 0;
    for (const EdgeId& pt : pattern_edge.targets) {
        const EdgeId image = edge_map.at(pt);
        while (host_pos < host_edge.targets.size() && host_edge.targets[host_pos] != image) {
            ++host_pos;
        }
        if (host_pos == host_edge.targets.size()) return std::nullopt;
        positions.push_back(host_pos);
        ++host_pos;
    }
    return positions;
}

bool subsequence_under_map(const Metagraph& to, const Edge& edge,
                           const std::map<EdgeId, EdgeId>& map, bool partial) {
    std::vector<EdgeId> mapped;
    for (const EdgeId& t : edge.targets) {
        auto it = map.find(t);
        if (it == map.end()) {
            if (partial) continue;
            return false;
        }
        mapped.push_back(it->second);
    }
    auto image_it = map.find(edge.id);
    if (image_it == map.end()) return partial;
    const Edge& image = to.get_edge(image_it->second);
    std::size_t pos = 0;
    for (const EdgeId& want : mapped) {
        while (pos < image.targets.size() && image.targets[pos] != want) ++pos;
        if (pos == image.targets.size()) return false;
        ++pos;
    }
    return true;
}

void check_injective(const std::map<EdgeId, EdgeId>& map, const char* what) {
    std::set<EdgeId> seen;
    for (const auto& entry : map) {
        if (!seen.insert(entry.second).second) {
            throw RuleFormatError(std::string(what) + " is not injective");
        }
    }
}

void check_into_domain(const std::map<EdgeId, EdgeId>& map, const std::vector<EdgeId>& from_domain,
                       const std::vector<EdgeId>& to_domain, const char* what) {
    for (const auto& entry : map) {
        if (!std::ranges::binary_search(from_domain, entry.first)) {
            throw RuleFormatError(std::string(what) + ": key outside the source graph");
        }
        if (!std::ranges::binary_search(to_domain, entry.second)) {
            throw RuleFormatError(std::string(what) + ": value outside the target graph");
        }
    }
}

}  // namespace

void validate_rule(const SPORule& rule) {
    const std::vector<EdgeId> left_domain = pattern_domain(rule.left);
    const std::vector<EdgeId> right_domain = pattern_domain(rule.right);
    check_injective(rule.preserve, "preservation map");
    check_into_domain(rule.preserve, left_domain, right_domain, "preservation map");
    for (const EdgeId& le : left_domain) {
        if (!rule.preserve.contains(le)) continue;
        if (!subsequence_under_map(rule.right, rule.left.get_edge(le), rule.preserve,
                                   /*partial=*/true)) {
            throw RuleFormatError("preservation map does not preserve target structure");
        }
    }
}

void validate_rule(const DPORule& rule) {
    const std::vector<EdgeId> interface_domain = pattern_domain(rule.interface);
    const std::vector<EdgeId> left_domain = pattern_domain(rule.left);
    const std::vector<EdgeId> right_domain = pattern_domain(rule.right);
    for (const EdgeId& ke : interface_domain) {
        if (!rule.to_left.contains(ke)) {
            throw RuleFormatError("interface embedding into L is not total");
        }
        if (!rule.to_right.contains(ke)) {
            throw RuleFormatError("interface embedding into R is not total");
        }
    }
    check_injective(rule.to_left, "interface embedding into L");
    check_injective(rule.to_right, "interface embedding into R");
    check_into_domain(rule.to_left, interface_domain, left_domain, "interface embedding into L");
    check_into_domain(rule.to_right, interface_domain, right_domain, "interface embedding into R");
    for (const EdgeId& ke : interface_domain) {
        const Edge& edge = rule.interface.get_edge(ke);
        if (!subsequence_under_map(rule.left, edge, rule.to_left, false) ||
            !subsequence_under_map(rule.right, edge, rule.to_right, false)) {
            throw RuleFormatError("interface embedding does not preserve target structure");
        }
    }
}

namespace {

void require_valid_match(const Metagraph& pattern, const Metagraph& host,
                         const HomomorphismMap& m, const EnrichmentRegistry& enrichments) {
    if (!is_valid_homomorphism(pattern, host, m, enrichments)) {
        throw InvalidMatchError("match failed re-validation against the host");
    }
}

}  // namespace

Derivation apply_spo(const Metagraph& host, const SPORule& rule, const HomomorphismMap& m,
                     const EnrichmentRegistry& enrichments) {
    validate_rule(rule);
    require_valid_match(rule.left, host, m, enrichments);

    const std::vector<EdgeId> left_domain = pattern_domain(rule.left);
    const std::vector<EdgeId> right_domain = pattern_domain(rule.right);
    std::set<EdgeId> right_set(right_domain.begin(), right_domain.end());
    std::map<EdgeId, EdgeId> preserve_inverse;
    for (const auto& [le, re] : rule.preserve) preserve_inverse.emplace(re, le);

    Metagraph result = host;

    // Deletion: images of unpreserved L-edges, then everything left dangling.
    // When a non-injective match merges a deleted item with a preserved one,
    // deletion wins.
    std::set<EdgeId> deleted;
    for (const EdgeId& le : left_domain) {
        if (rule.preserve.contains(le)) continue;
        const EdgeId seed = m.edge_map.at(le);
        if (deleted.contains(seed)) continue;
        for (const EdgeId& gone : result.remove_edge(seed, RemovePolicy::Cascade)) {
            deleted.insert(gone);
        }
    }

    // Instantiate R: preserved images keep their (surviving) host edge;
    // created edges are added bottom-up, gluing onto existing structure
    // through hash-consing.
    std::map<EdgeId, EdgeId> mu;
    std::set<EdgeId> created_set;
    for (const EdgeId& re : right_domain) {
        auto pre = preserve_inverse.find(re);
        if (pre != preserve_inverse.end()) {
            const EdgeId image = m.edge_map.at(pre->second);
            if (!deleted.contains(image)) mu.emplace(re, image);
        } else {
            created_set.insert(re);
        }
    }
    for (const EdgeId& re : creation_order(rule.right, created_set)) {
        const Edge& blueprint = rule.right.get_edge(re);
        std::vector<EdgeId> targets;
        bool ok = true;
        for (const EdgeId& rt : blueprint.targets) {
            auto it = mu.find(rt);
            if (it == mu.end()) {
                ok = false;
                break;
            }
            targets.push_back(it->second);
        }
        if (!ok) continue;  // target vanished with a cascaded preserved image
        mu.emplace(re, result.add_edge(blueprint.label, std::move(targets), blueprint.enrichment));
    }

    // Preserved edges may be relabeled/retargeted per R. Only differences are
    // applied: matched target positions are spliced, extra host targets stay.
    std::map<EdgeId, EdgeId> remap;
    for (const auto& [le, re] : rule.preserve) {
        const EdgeId original = m.edge_map.at(le);
        if (deleted.contains(original)) continue;
        const EdgeId current_id = resolve_through(remap, original);
        const Edge& left_edge = rule.left.get_edge(le);
        const Edge& right_edge = rule.right.get_edge(re);

        const Edge current = result.get_edge(current_id);
        Label new_label = right_edge.label == left_edge.label ? current.label : right_edge.label;
        std::optional<Enrichment> new_enrichment = right_edge.enrichment == left_edge.enrichment
                                                       ? current.enrichment
                                                       : right_edge.enrichment;
        std::vector<EdgeId> new_targets = current.targets;
        bool targets_known = true;
        std::vector<EdgeId> images;
        for (const EdgeId& rt : right_edge.targets) {
            auto it = mu.find(rt);
            if (it == mu.end()) {
                targets_known = false;
                break;
            }
            images.push_back(resolve_through(remap, it->second));
        }
        if (targets_known) {
            std::map<EdgeId, EdgeId> current_map;
            for (const auto& [l2, h2] : m.edge_map) current_map.emplace(l2, h2);
            for (auto& [l2, h2] : current_map) h2 = resolve_through(remap, h2);
            auto positions = alignment_positions(left_edge, current, current_map);
            if (positions && left_edge.targets.size() == right_edge.targets.size()) {
                for (std::size_t i = 0; i < positions->size(); ++i) {
                    new_targets[(*positions)[i]] = images[i];
                }
            } else if (positions) {
                // Arity changed: splice the aligned slots out and insert the
                // new image list at the first aligned position.
                const std::size_t insert_at =
                    positions->empty() ? new_targets.size() : positions->front();
                std::vector<EdgeId> spliced;
                for (std::size_t i = 0; i < new_targets.size(); ++i) {
                    if (std::ranges::find(*positions, i) == positions->end()) {
                        spliced.push_back(new_targets[i]);
                    }
                }
                const std::size_t clamped = std::min(insert_at, spliced.size());
                spliced.insert(spliced.begin() + static_cast<std::ptrdiff_t>(clamped),
                               images.begin(), images.end());
                new_targets = std::move(spliced);
            }
        }
        if (new_label == current.label && new_targets == current.targets &&
            new_enrichment == current.enrichment) {
            continue;
        }
        result.replace_edge(current_id, new_label, std::move(new_targets),
                            std::move(new_enrichment), &remap);
    }

    // Instantiated R-roots become roots of the result.
    for (const EdgeId& r_root : rule.right.roots()) {
        auto it = mu.find(r_root);
        if (it != mu.end()) result.mark_root(resolve_through(remap, it->second));
    }

    Derivation derivation;
    derivation.match = m;
    for (const EdgeId& g : host.edge_ids()) {
        if (deleted.contains(g)) continue;
        derivation.host_map.emplace(g, resolve_through(remap, g));
    }
    for (const auto& [re, h] : mu) {
        derivation.replacement_map.emplace(re, resolve_through(remap, h));
    }
    derivation.result = std::move(result);
    return derivation;
}

std::variant<Derivation, GluingViolation> apply_dpo(const Metagraph& host, const DPORule& rule,
                                                    const HomomorphismMap& m,
                                                    const EnrichmentRegistry& enrichments) {
    validate_rule(rule);
    require_valid_match(rule.left, host, m, enrichments);

    const std::vector<EdgeId> left_domain = pattern_domain(rule.left);
    const std::vector<EdgeId> right_domain = pattern_domain(rule.right);
    std::set<EdgeId> preserved_left;
    for (const auto& [ke, le] : rule.to_left) preserved_left.insert(le);

    std::set<EdgeId> delete_images;
    std::set<EdgeId> keep_images;
    for (const EdgeId& le : left_domain) {
        const EdgeId image = m.edge_map.at(le);
        if (preserved_left.contains(le)) {
            keep_images.insert(image);
        } else {
            delete_images.insert(image);
        }
    }

    // Identification condition: m may not merge a deleted item with a
    // preserved one.
    std::vector<EdgeId> identified;
    std::ranges::set_intersection(delete_images, keep_images, std::back_inserter(identified));
    if (!identified.empty()) {
        return GluingViolation{GluingViolation::Reason::Identification, std::move(identified)};
    }

    // Dangling condition: no edge outside the delete-set may target into it.
    std::set<EdgeId> dangling;
    for (const EdgeId& victim : delete_images) {
        for (const EdgeId& referrer : host.incident(victim)) {
            if (!delete_images.contains(referrer)) dangling.insert(referrer);
        }
    }
    if (!dangling.empty()) {
        return GluingViolation{GluingViolation::Reason::Dangling,
                               {dangling.begin(), dangling.end()}};
    }

    // D := host minus the delete-set. The gluing condition guarantees each
    // cascade stays inside the delete-set.
    Metagraph intermediate = host;
    for (const EdgeId& victim : delete_images) {
        if (!intermediate.contains(victim)) continue;
        for (const EdgeId& gone : intermediate.remove_edge(victim, RemovePolicy::Cascade)) {
            if (!delete_images.contains(gone)) {
                throw Error("gluing check failed to confine the delete-set");
            }
        }
    }
    intermediate.validate();

    // Glue R \ k(K) onto D at the interface images.
    Metagraph result = intermediate;
    std::map<EdgeId, EdgeId> mu;
    std::set<EdgeId> created_set(right_domain.begin(), right_domain.end());
    for (const auto& [ke, re] : rule.to_right) {
        mu.emplace(re, m.edge_map.at(rule.to_left.at(ke)));
        created_set.erase(re);
    }
    for (const EdgeId& re : creation_order(rule.right, created_set)) {
        const Edge& blueprint = rule.right.get_edge(re);
        std::vector<EdgeId> targets;
        for (const EdgeId& rt : blueprint.targets) {
            targets.push_back(mu.at(rt));
        }
        mu.emplace(re, result.add_edge(blueprint.label, std::move(targets), blueprint.enrichment));
    }
    for (const EdgeId& r_root : rule.right.roots()) {
        auto it = mu.find(r_root);
        if (it != mu.end()) result.mark_root(it->second);
    }

    Derivation derivation;
    derivation.match = m;
    derivation.result = std::move(result);
    derivation.intermediate = std::move(intermediate);
    derivation.replacement_map = std::move(mu);
    for (const EdgeId& g : host.edge_ids()) {
        if (!delete_images.contains(g)) derivation.host_map.emplace(g, g);
    }
    return derivation;
}

std::vector<HomomorphismMap> find_rule_matches(const Metagraph& host, const SPORule& rule,
                                               const EnrichmentRegistry& enrichments) {
    return find_homomorphisms(rule.left, host, std::nullopt, nullptr, enrichments);
}

std::vector<HomomorphismMap> find_rule_matches(const Metagraph& host, const DPORule& rule,
                                               const EnrichmentRegistry& enrichments) {
    return find_homomorphisms(rule.left, host, std::nullopt, nullptr, enrichments);
}

std::vector<Derivation> derive_all(const Metagraph& host, const SPORule& rule,
                                   const EnrichmentRegistry& enrichments) {
    std::vector<Derivation> out;
    for (const HomomorphismMap& m : find_rule_matches(host, rule, enrichments)) {
        out.push_back(apply_spo(host, rule, m, enrichments));
    }
    return out;
}

std::vector<Derivation> derive_all(const Metagraph& host, const DPORule& rule,
                                   const EnrichmentRegistry& enrichments) {
    std::vector<Derivation> out;
    for (const HomomorphismMap& m : find_rule_matches(host, rule, enrichments)) {
        auto outcome = apply_dpo(host, rule, m, enrichments);
        if (auto* derivation = std::get_if<Derivation>(&outcome)) {
            out.push_back(std::move(*derivation));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Rule files

namespace {

bool is_symbol(const Expression& e, const char* name) {
    return e.is_leaf() && e.label().is_symbol() && e.label().name() == name;
}

std::vector<std::size_t> parse_path(const Expression& e) {
    if (!e.is_list()) throw RuleFormatError("rule path must be a list of indices");
    std::vector<std::size_t> path;
    for (const Expression& step : e.children()) {
        if (!step.is_leaf() || !step.label().is_symbol()) {
            throw RuleFormatError("rule path step must be a number");
        }
        const std::string& text = step.label().name();
        if (text.empty() || !std::ranges::all_of(text, [](char c) { return c >= '0' && c <= '9'; })) {
            throw RuleFormatError("rule path step must be a number: " + text);
        }
        path.push_back(std::stoul(text));
    }
    return path;
}

EdgeId resolve_path(const Metagraph& space, EdgeId root, const std::vector<std::size_t>& path) {
    EdgeId current = root;
    for (std::size_t step : path) {
        const Edge& edge = space.get_edge(current);
        if (step >= edge.targets.size()) {
            throw RuleFormatError("rule path index out of range");
        }
        current = edge.targets[step];
    }
    return current;
}

std::map<EdgeId, EdgeId> parse_pairs(const Expression& pairs, const Metagraph& from,
                                     EdgeId from_root, const Metagraph& to, EdgeId to_root) {
    if (!pairs.is_list()) throw RuleFormatError("rule mapping must be a list of path pairs");
    std::map<EdgeId, EdgeId> map;
    for (const Expression& pair : pairs.children()) {
        if (!pair.is_list() || pair.size() != 2) {
            throw RuleFormatError("rule mapping entry must be a pair of paths");
        }
        const EdgeId key = resolve_path(from, from_root, parse_path(pair.child(0)));
        const EdgeId value = resolve_path(to, to_root, parse_path(pair.child(1)));
        auto [it, inserted] = map.emplace(key, value);
        if (!inserted && it->second != value) {
            throw RuleFormatError("rule mapping names one sub-expression twice");
        }
    }
    return map;
}

}  // namespace

Rule parse_rule(const Expression& directive) {
    if (!directive.is_list() || directive.size() < 2 || !is_symbol(directive.child(0), "!rule")) {
        throw RuleFormatError("not a (!rule ...) form");
    }
    const Expression& kind = directive.child(1);
    if (is_symbol(kind, "spo")) {
        if (directive.size() != 5) {
            throw RuleFormatError("(!rule spo ...) takes L, R and a mapping");
        }
        SPORule rule;
        const EdgeId left_root = rule.left.add_expression(directive.child(2));
        const EdgeId right_root = rule.right.add_expression(directive.child(3));
        rule.preserve =
            parse_pairs(directive.child(4), rule.left, left_root, rule.right, right_root);
        validate_rule(rule);
        return rule;
    }
    if (is_symbol(kind, "dpo")) {
        if (directive.size() != 7) {
            throw RuleFormatError("(!rule dpo ...) takes L, K, R and two mappings");
        }
        DPORule rule;
        const EdgeId left_root = rule.left.add_expression(directive.child(2));
        const EdgeId interface_root = rule.interface.add_expression(directive.child(3));
        const EdgeId right_root = rule.right.add_expression(directive.child(4));
        rule.to_left =
            parse_pairs(directive.child(5), rule.interface, interface_root, rule.left, left_root);
        rule.to_right =
            parse_pairs(directive.child(6), rule.interface, interface_root, rule.right, right_root);
        validate_rule(rule);
        return rule;
    }
    throw RuleFormatError("unknown rule kind; expected spo or dpo");
}

std::vector<Rule> load_rules(std::string_view text) {
    ParseOptions options;
    options.allow_rule_directives = true;
    std::vector<Rule> rules;
    for (const Expression& form : parse_stream(text, options)) {
        rules.push_back(parse_rule(form));
    }
    return rules;
}

}  // namespace mgrew

#include <mgrew/enrichments.hpp>

#include <mgrew/errors.hpp>

#include <cmath>
#include <cstring>

namespace mgrew {

EnrichmentRegistry EnrichmentRegistry::with_builtins() {
    EnrichmentRegistry registry;
    registry.register_kind(EnrichmentKind{"vector-f64", {}, cosine_proximity});
    return registry;
}

void EnrichmentRegistry::register_kind(EnrichmentKind kind) {
    if (kinds_.contains(kind.name)) {
        throw DuplicateKindError("enrichment kind already registered: " + kind.name);
    }
    std::string name = kind.name;
    kinds_.emplace(std::move(name), std::move(kind));
}

bool EnrichmentRegistry::has_kind(const std::string& name) const {
    return kinds_.contains(name);
}

const EnrichmentKind& EnrichmentRegistry::kind(const std::string& name) const {
    auto it = kinds_.find(name);
    if (it == kinds_.end()) {
        throw UnknownKindError("unknown enrichment kind: " + name);
    }
    return it->second;
}

bool EnrichmentRegistry::hom_check(const std::string& kind_name, const Payload& s,
                                   const Payload& s2) const {
    const EnrichmentKind& k = kind(kind_name);
    if (s == s2) return true;
    for (const EnrichmentKind::Witness& w : k.witnesses) {
        if (w.map(s) == s2) return true;
    }
    return false;
}

std::vector<std::string> EnrichmentRegistry::witnesses_mapping(const std::string& kind_name,
                                                               const Payload& s,
                                                               const Payload& s2) const {
    std::vector<std::string> names;
    if (s == s2) names.push_back("identity");
    auto it = kinds_.find(kind_name);
    if (it == kinds_.end()) return names;  // unregistered kinds are byte-identity
    for (const EnrichmentKind::Witness& w : it->second.witnesses) {
        if (w.map(s) == s2) names.push_back(w.name);
    }
    return names;
}

double EnrichmentRegistry::proximity(const std::string& kind_name, const Payload& a,
                                     const Payload& b) const {
    const EnrichmentKind& k = kind(kind_name);
    if (!k.proximity) {
        throw NoMetricError("enrichment kind has no proximity metric: " + kind_name);
    }
    return k.proximity(a, b);
}

Payload pack_doubles(std::span<const double> values) {
    Payload bytes(values.size() * sizeof(double));
    if (!values.empty()) {
        std::memcpy(bytes.data(), values.data(), bytes.size());
    }
    return bytes;
}

std::vector<double> unpack_doubles(const Payload& payload) {
    if (payload.size() % sizeof(double) != 0) {
        throw Error("vector-f64 payload size is not a multiple of 8");
    }
    std::vector<double> values(payload.size() / sizeof(double));
    if (!values.empty()) {
        std::memcpy(values.data(), payload.data(), payload.size());
    }
    return values;
}

double cosine_proximity(const Payload& a, const Payload& b) {
    if (a == b) return 1.0;
    const std::vector<double> va = unpack_doubles(a);
    const std::vector<double> vb = unpack_doubles(b);
    if (va.size() != vb.size()) return 0.0;
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < va.size(); ++i) {
        dot += va[i] * vb[i];
        na += va[i] * va[i];
        nb += vb[i] * vb[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.5;  // zero vector: treated as orthogonal
    const double cos = dot / (std::sqrt(na) * std::sqrt(nb));
    return (std::clamp(cos, -1.0, 1.0) + 1.0) / 2.0;
}

}  // namespace mgrew

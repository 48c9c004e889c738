#pragma once

#include <mgrew/edge.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace mgrew {

using Payload = std::vector<std::uint8_t>;

/// An enrichment kind: a namespace of payloads together with the finite set
/// of transformations registered as its homomorphisms and an optional
/// proximity metric. The identity transformation is always available, so
/// hom_check(k, x, x) holds for every kind and payload.
struct EnrichmentKind {
    struct Witness {
        std::string name;
        std::function<Payload(const Payload&)> map;
    };

    std::string name;
    std::vector<Witness> witnesses;
    std::function<double(const Payload&, const Payload&)> proximity;  // may be empty
};

class EnrichmentRegistry {
public:
    /// Registry with the built-in "vector-f64" kind (payload: packed
    /// little-endian doubles, proximity: cosine rescaled to [0,1]).
    static EnrichmentRegistry with_builtins();

    void register_kind(EnrichmentKind kind);  // throws DuplicateKindError
    bool has_kind(const std::string& name) const;
    const EnrichmentKind& kind(const std::string& name) const;  // throws UnknownKindError

    /// True iff some registered homomorphism for the kind maps s to s'.
    /// Always true when s == s'. Throws UnknownKindError.
    bool hom_check(const std::string& kind_name, const Payload& s, const Payload& s2) const;

    /// Names of witnesses (including the implicit "identity") that map s to
    /// s', in registration order. Unregistered kinds fall back to
    /// byte-identity, so this never throws.
    std::vector<std::string> witnesses_mapping(const std::string& kind_name, const Payload& s,
                                               const Payload& s2) const;

    /// Symmetric, in [0,1], proximity(a, a) == 1.
    /// Throws UnknownKindError / NoMetricError.
    double proximity(const std::string& kind_name, const Payload& a, const Payload& b) const;

private:
    std::map<std::string, EnrichmentKind> kinds_;
};

/// Payload codec for the vector-f64 kind.
Payload pack_doubles(std::span<const double> values);
std::vector<double> unpack_doubles(const Payload& payload);

/// Cosine similarity rescaled to [0,1] via (cos+1)/2. Vectors of unequal
/// length have proximity 0; a zero vector is treated as orthogonal to
/// everything except itself.
double cosine_proximity(const Payload& a, const Payload& b);

}  // namespace mgrew

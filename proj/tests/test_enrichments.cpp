#include <mgrew/base64.hpp>
#include <mgrew/enrichments.hpp>
#include <mgrew/errors.hpp>

#include <doctest.h>

#include "support/oracles.hpp"

#include <cmath>

using namespace mgrew;

namespace {

Payload scale_payload(const Payload& p, double factor) {
    std::vector<double> v = unpack_doubles(p);
    for (double& x : v) x *= factor;
    return pack_doubles(v);
}

EnrichmentKind linear_kind(const std::string& name, std::vector<double> factors,
                           bool with_metric = false) {
    EnrichmentKind kind;
    kind.name = name;
    for (double f : factors) {
        kind.witnesses.push_back({"scale-" + std::to_string(static_cast<int>(f)),
                                  [f](const Payload& p) { return scale_payload(p, f); }});
    }
    if (with_metric) kind.proximity = cosine_proximity;
    return kind;
}

Payload random_payload(oracle::Rng& rng, std::size_t max_len = 8) {
    Payload p(1 + rng.below(max_len));
    for (auto& b : p) b = static_cast<std::uint8_t>(rng.below(256));
    return p;
}

}  // namespace

TEST_CASE("kinds register once and resolve by name") {
    EnrichmentRegistry registry;
    registry.register_kind(EnrichmentKind{"identity-bytes", {}, nullptr});
    CHECK(registry.has_kind("identity-bytes"));
    CHECK_THROWS_AS(registry.register_kind(EnrichmentKind{"identity-bytes", {}, nullptr}),
                    DuplicateKindError);
    CHECK_THROWS_AS(registry.kind("missing"), UnknownKindError);
}

TEST_CASE("identity-bytes accepts only equal payloads") {
    EnrichmentRegistry registry;
    registry.register_kind(EnrichmentKind{"identity-bytes", {}, nullptr});
    CHECK(registry.hom_check("identity-bytes", {1, 2}, {1, 2}));
    CHECK_FALSE(registry.hom_check("identity-bytes", {1, 2}, {1, 3}));
    CHECK_THROWS_AS(registry.hom_check("missing", {}, {}), UnknownKindError);
}

TEST_CASE("the identity homomorphism is available for every kind") {
    EnrichmentRegistry registry = EnrichmentRegistry::with_builtins();
    registry.register_kind(linear_kind("lin", {2.0}));
    oracle::Rng rng(211);
    for (int round = 0; round < 100; ++round) {
        const Payload p = random_payload(rng);
        CHECK(registry.hom_check("vector-f64", p, p));
        CHECK(registry.hom_check("lin", p, p));
    }
}

TEST_CASE("a linear witness maps payloads elementwise") {
    EnrichmentRegistry registry;
    registry.register_kind(linear_kind("lin", {2.0}));
    const Payload v12 = pack_doubles(std::vector<double>{1, 2});
    const Payload v24 = pack_doubles(std::vector<double>{2, 4});
    const Payload v25 = pack_doubles(std::vector<double>{2, 5});
    CHECK(registry.hom_check("lin", v12, v24));
    CHECK_FALSE(registry.hom_check("lin", v12, v25));
    CHECK(registry.witnesses_mapping("lin", v12, v24) == std::vector<std::string>{"scale-2"});
}

TEST_CASE("witnesses closed under composition satisfy chained checks") {
    EnrichmentRegistry registry;
    registry.register_kind(linear_kind("lin", {2.0, 4.0}));
    oracle::Rng rng(223);
    for (int round = 0; round < 50; ++round) {
        std::vector<double> v(1 + rng.below(4));
        for (double& x : v) x = static_cast<double>(rng.below(20)) - 10.0;
        const Payload s = pack_doubles(v);
        const Payload s1 = scale_payload(s, 2.0);
        const Payload s2 = scale_payload(s1, 2.0);
        CHECK(registry.hom_check("lin", s, s1));
        CHECK(registry.hom_check("lin", s1, s2));
        CHECK(registry.hom_check("lin", s, s2));  // composed witness scale-4
    }
}

TEST_CASE("vector proximity is 1 on itself, 0.5 when orthogonal") {
    EnrichmentRegistry registry = EnrichmentRegistry::with_builtins();
    const Payload v = pack_doubles(std::vector<double>{3, -1, 2});
    CHECK(registry.proximity("vector-f64", v, v) == doctest::Approx(1.0).epsilon(1e-12));

    const Payload ex = pack_doubles(std::vector<double>{1, 0});
    const Payload ey = pack_doubles(std::vector<double>{0, 1});
    // hand-computed (cos + 1) / 2 with cos = 0
    CHECK(registry.proximity("vector-f64", ex, ey) == doctest::Approx(0.5));

    const Payload opposite = pack_doubles(std::vector<double>{-1, 0});
    CHECK(registry.proximity("vector-f64", ex, opposite) == doctest::Approx(0.0));
}

TEST_CASE("proximity is symmetric and within the unit interval") {
    EnrichmentRegistry registry = EnrichmentRegistry::with_builtins();
    oracle::Rng rng(227);
    for (int round = 0; round < 200; ++round) {
        std::vector<double> a(3), b(3);
        for (double& x : a) x = static_cast<double>(rng.below(21)) - 10.0;
        for (double& x : b) x = static_cast<double>(rng.below(21)) - 10.0;
        const double ab = registry.proximity("vector-f64", pack_doubles(a), pack_doubles(b));
        const double ba = registry.proximity("vector-f64", pack_doubles(b), pack_doubles(a));
        CHECK(ab == doctest::Approx(ba));
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);
    }
}

TEST_CASE("kinds without a metric refuse proximity queries") {
    EnrichmentRegistry registry;
    registry.register_kind(EnrichmentKind{"identity-bytes", {}, nullptr});
    CHECK_THROWS_AS(registry.proximity("identity-bytes", {}, {}), NoMetricError);
    CHECK_THROWS_AS(registry.proximity("missing", {}, {}), UnknownKindError);
}

TEST_CASE("payload codec and base64 round-trip") {
    const std::vector<double> values{0.0, -1.5, 3.25, 1e100};
    CHECK(unpack_doubles(pack_doubles(values)) == values);

    oracle::Rng rng(229);
    for (int round = 0; round < 50; ++round) {
        const Payload p = random_payload(rng, 16);
        CHECK(base64::decode(base64::encode(p)) == p);
    }
    CHECK(base64::encode({}) == "");
    CHECK_THROWS_AS(base64::decode("ab"), Error);
    CHECK_THROWS_AS(base64::decode("a=bc"), Error);
    CHECK_THROWS_AS(base64::decode("!!!!"), Error);
}

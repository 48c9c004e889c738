#include <mgrew/errors.hpp>
#include <mgrew/matcher.hpp>
#include <mgrew/reader.hpp>

#include <doctest.h>

#include "support/oracles.hpp"

#include <algorithm>
#include <set>

using namespace mgrew;

namespace {

Expression sym(const std::string& name) { return Expression::symbol(name); }
Expression var(const std::string& name) { return Expression::variable(name); }

std::string referent_text(const Bindings& b, const std::string& name) {
    auto entry = b.lookup(name);
    REQUIRE(entry.has_value());
    REQUIRE(b.space() != nullptr);
    return b.space()->lift(entry->referent).to_text();
}

/// Normalized view of match results for oracle comparison.
std::vector<oracle::BruteMatch> as_brute(const std::vector<MatchResult>& results) {
    std::vector<oracle::BruteMatch> out;
    for (const MatchResult& m : results) {
        oracle::BruteMatch bm;
        bm.root = m.matched_root;
        for (const auto& [name, entry] : m.bindings.entries()) {
            bm.assignment.emplace(name, entry.referent);
        }
        out.push_back(std::move(bm));
    }
    std::ranges::sort(out);
    return out;
}

Metagraph random_space(oracle::Rng& rng, std::size_t max_roots,
                       const std::vector<std::string>& symbols,
                       const std::vector<std::string>& variables, bool with_types) {
    Metagraph space;
    const std::size_t roots = 1 + rng.below(max_roots);
    for (std::size_t i = 0; i < roots; ++i) {
        space.add_expression(oracle::random_expression(rng, 2, symbols, variables, 0.15));
    }
    if (with_types) {
        const std::vector<std::string> types{"T0", "T1", "T2"};
        for (const std::string& t : types) {
            if (rng.chance(0.7)) space.add_expression(parse("(: " + t + " Type)"));
        }
        if (rng.chance(0.5)) space.add_expression(parse("(: T1 T0)"));
        if (rng.chance(0.3)) space.add_expression(parse("(: T2 T1)"));
        for (const std::string& s : symbols) {
            if (rng.chance(0.3)) {
                space.add_expression(parse("(: " + s + " " + types[rng.below(3)] + ")"));
            }
        }
        for (const std::string& v : variables) {
            if (rng.chance(0.25)) {
                space.add_expression(parse("(: $" + v + " " + types[rng.below(3)] + ")"));
            }
        }
    }
    return space;
}

}  // namespace

// ---------------------------------------------------------------------------
// unify / substitute

TEST_CASE("unify binds pattern variables to target sub-expressions") {
    Metagraph space = load("(has Sam balloon)");
    auto b = unify(parse("(has Sam $o)"), parse("(has Sam balloon)"), space);
    REQUIRE(b.has_value());
    CHECK(b->size() == 1);
    CHECK(referent_text(*b, "o") == "balloon");
    CHECK(b->lookup("o")->side == BindingSide::Pattern);
}

TEST_CASE("a variable unifies with itself without binding") {
    Metagraph space;
    auto b = unify(var("x"), var("x"), space);
    REQUIRE(b.has_value());
    CHECK(b->empty());
}

TEST_CASE("no assignment makes ($x $x) equal (a b)") {
    Metagraph space;
    CHECK_FALSE(unify(parse("($x $x)"), parse("(a b)"), space).has_value());
    // while (a a) works
    auto b = unify(parse("($x $x)"), parse("(a a)"), space);
    REQUIRE(b.has_value());
    CHECK(referent_text(*b, "x") == "a");
}

TEST_CASE("pattern variables take precedence over target variables") {
    Metagraph space;
    auto b = unify(parse("(f $p)"), parse("(f $t)"), space);
    REQUIRE(b.has_value());
    REQUIRE(b->lookup("p").has_value());
    CHECK_FALSE(b->lookup("t").has_value());
    CHECK(b->lookup("p")->side == BindingSide::Pattern);
    CHECK(referent_text(*b, "p") == "$t");
}

TEST_CASE("target variables bind when no pattern variable faces them") {
    Metagraph space;
    auto b = unify(parse("(f a)"), parse("(f $t)"), space);
    REQUIRE(b.has_value());
    CHECK(referent_text(*b, "t") == "a");
    CHECK(b->lookup("t")->side == BindingSide::Target);
}

TEST_CASE("occurs check rejects self-containing bindings") {
    Metagraph space;
    CHECK_FALSE(unify(var("x"), parse("(f $x)"), space).has_value());
    CHECK_FALSE(unify(parse("($x ($x))"), parse("(($y) $y)"), space).has_value());
}

TEST_CASE("unification makes both sides equal after substitution") {
    Metagraph space;
    oracle::Rng rng(307);
    const std::vector<std::string> symbols{"a", "b", "f"};
    int successes = 0;
    for (int round = 0; round < 300; ++round) {
        const Expression p = oracle::random_expression(rng, 2, symbols, {"x", "y"}, 0.4);
        const Expression e = oracle::random_expression(rng, 2, symbols, {"u", "v"}, 0.4);
        auto b = unify(p, e, space);
        if (!b) continue;
        ++successes;
        CHECK(substitute(p, *b) == substitute(e, *b));
    }
    CHECK(successes > 20);  // the generator must actually exercise success paths
}

TEST_CASE("typed variables only bind type-compatible referents") {
    Metagraph space = load(
        "(: T Type)\n(: T2 Type)\n(: T2 T)\n"
        "(: a T2)\n(: b Other)\n"
        "(: $x T)\n");
    CHECK(unify(var("x"), sym("a"), space).has_value());       // T2 < T
    CHECK_FALSE(unify(var("x"), sym("b"), space).has_value()); // Other is unrelated
    CHECK_FALSE(unify(var("x"), sym("c"), space).has_value()); // untyped referent
}

TEST_CASE("substitute replaces bound variables and leaves the rest") {
    Metagraph space;
    auto b = unify(var("x"), sym("7"), space);
    REQUIRE(b.has_value());
    CHECK(substitute(parse("($x $x)"), *b).to_text() == "(7 7)");

    Bindings empty;
    CHECK(substitute(parse("(has Sam $o)"), empty) == parse("(has Sam $o)"));
}

TEST_CASE("substitute agrees with naive tree substitution") {
    oracle::Rng rng(311);
    const std::vector<std::string> symbols{"a", "b", "g"};
    for (int round = 0; round < 100; ++round) {
        Metagraph space;
        const Expression referent_x = oracle::random_expression(rng, 2, symbols, {});
        const Expression referent_y = oracle::random_expression(rng, 2, symbols, {});
        auto bx = unify(parse("($x $y)"),
                        Expression::list({referent_x, referent_y}), space);
        REQUIRE(bx.has_value());
        const Expression target = oracle::random_expression(rng, 3, symbols, {"x", "y"}, 0.5);
        const Expression expected = oracle::naive_substitute(
            target, {{"x", referent_x}, {"y", referent_y}});
        CHECK(substitute(target, *bx) == expected);
    }
}

// ---------------------------------------------------------------------------
// match / transform

TEST_CASE("match returns one result per matching root, in root order") {
    Metagraph space = load("(has Sam balloon)\n(has Sam ball)\n(has Tom kite)\n");
    const std::vector<MatchResult> results = match(space, parse("(has Sam $o)"));
    REQUIRE(results.size() == 2);
    CHECK(results[0].matched_root < results[1].matched_root);
    CHECK(referent_text(results[0].bindings, "o") == "balloon");
    CHECK(referent_text(results[1].bindings, "o") == "ball");

    Metagraph empty;
    CHECK(match(empty, parse("(anything $x)")).empty());
}

TEST_CASE("match results reproduce their roots under substitution") {
    oracle::Rng rng(313);
    const std::vector<std::string> symbols{"a", "b", "c", "f"};
    for (int round = 0; round < 80; ++round) {
        Metagraph space = random_space(rng, 6, symbols, {"r"}, false);
        const Expression pattern =
            oracle::random_expression(rng, 2, symbols, {"x", "y"}, 0.5);
        for (const MatchResult& m : match(space, pattern)) {
            CHECK(substitute(pattern, m.bindings) == space.lift(m.matched_root));
            CHECK(is_valid_homomorphism(*m.pattern_space, space, m.hom));
        }
    }
}

TEST_CASE("match agrees with the brute-force enumeration oracle") {
    oracle::Rng rng(317);
    const std::vector<std::string> symbols{"a", "b", "f"};
    for (int round = 0; round < 120; ++round) {
        Metagraph space = random_space(rng, 5, symbols, {"r"}, round % 2 == 1);
        const Expression pattern =
            oracle::random_expression(rng, 2, symbols, {"x", "y"}, 0.45);
        CHECK(as_brute(match(space, pattern)) == oracle::brute_match(space, pattern));
    }
}

TEST_CASE("typed pattern variables filter referents by inheritance") {
    Metagraph space = load(
        "(: T Type)\n(: T2 Type)\n(: T2 T)\n"
        "(: balloon T2)\n"
        "(: $o T)\n"
        "(has Sam balloon)\n(has Sam ball)\n");
    const std::vector<MatchResult> results = match(space, parse("(has Sam $o)"));
    REQUIRE(results.size() == 1);
    CHECK(referent_text(results[0].bindings, "o") == "balloon");
}

TEST_CASE("match is deterministic across calls") {
    oracle::Rng rng(331);
    Metagraph space = random_space(rng, 8, {"a", "b", "f"}, {"r"}, false);
    const Expression pattern = parse("($x $y)");
    const auto first = as_brute(match(space, pattern));
    const auto second = as_brute(match(space, pattern));
    CHECK(first == second);
}

TEST_CASE("transform instantiates the template once per match, in match order") {
    Metagraph space = load("(has Sam balloon)\n(has Sam ball)\n");
    const std::vector<Expression> out = transform(space, parse("(has Sam $o)"), var("o"));
    REQUIRE(out.size() == 2);
    CHECK(out[0] == sym("balloon"));
    CHECK(out[1] == sym("ball"));

    const std::vector<Expression> constant =
        transform(space, parse("(has Sam $o)"), sym("yes"));
    CHECK(constant == std::vector<Expression>{sym("yes"), sym("yes")});

    CHECK_THROWS_AS(transform(space, parse("(has Sam $o)"), var("other")),
                    TemplateVariableError);
}

TEST_CASE("transform equals substitution mapped over match bindings") {
    oracle::Rng rng(337);
    const std::vector<std::string> symbols{"a", "b", "f"};
    for (int round = 0; round < 60; ++round) {
        Metagraph space = random_space(rng, 6, symbols, {}, false);
        const Expression pattern =
            oracle::random_expression(rng, 2, symbols, {"x"}, 0.5);
        const std::vector<std::string> available = pattern.free_variables();
        const Expression templ =
            oracle::random_expression(rng, 2, symbols, available, available.empty() ? 0.0 : 0.5);
        std::vector<Expression> expected;
        for (const MatchResult& m : match(space, pattern)) {
            expected.push_back(substitute(templ, m.bindings));
        }
        CHECK(transform(space, pattern, templ) == expected);
    }
}

TEST_CASE("conjunction joins bindings across patterns, disjunction unions results") {
    Metagraph space = load("(parent alice bob)\n(parent bob carol)\n(parent alice dan)\n");
    const std::vector<Expression> conj{parse("(parent alice $x)"), parse("(parent $x $y)")};
    const std::vector<Bindings> joined = match_all(space, conj);
    REQUIRE(joined.size() == 1);
    CHECK(referent_text(joined[0], "x") == "bob");
    CHECK(referent_text(joined[0], "y") == "carol");

    const std::vector<Expression> disj{parse("(parent alice $x)"), parse("(parent bob $x)")};
    const std::vector<MatchResult> unioned = match_any(space, disj);
    CHECK(unioned.size() == 3);

    // empty conjunction is vacuously true
    CHECK(match_all(space, {}).size() == 1);
}

// ---------------------------------------------------------------------------
// homomorphisms

TEST_CASE("an unconstrained vertex maps onto every host edge") {
    Metagraph pattern;
    pattern.add_expression(var("v"));
    Metagraph host = load("a\nb\nc\n");
    const auto maps = find_homomorphisms(pattern, host);
    CHECK(maps.size() == host.edge_count());

    Metagraph empty_pattern;
    CHECK_THROWS_AS(find_homomorphisms(empty_pattern, host), Error);
}

TEST_CASE("symbol-labeled pattern edges require equal host labels") {
    Metagraph pattern;
    pattern.add_expression(sym("a"));
    Metagraph host = load("a\nb\n(a b)\n");
    const auto maps = find_homomorphisms(pattern, host);
    REQUIRE(maps.size() == 1);
    CHECK(host.lift(maps[0].edge_map.begin()->second) == sym("a"));
}

TEST_CASE("typed pattern edges map only to hosts whose type inherits") {
    Metagraph pattern;
    const EdgeId pv = pattern.add_expression(var("p"));
    pattern.add_expression(parse("(: $p T)"));

    Metagraph host = load(
        "(: T Type)\n(: T2 Type)\n(: T2 T)\n"
        "(: x T2)\n(: y Unrelated)\nx\ny\nz\n");
    const auto maps = find_homomorphisms(pattern, host);
    // x has type T2 < T, and T2 itself is declared (: T2 T); nothing else
    // carries a type inheriting from T.
    std::set<std::string> images;
    for (const HomomorphismMap& m : maps) {
        images.insert(host.lift(m.edge_map.at(pv)).to_text());
    }
    CHECK(images == std::set<std::string>{"x", "T2"});

    // with T' = T the match also succeeds
    Metagraph host2 = load("(: T Type)\n(: w T)\nw\n");
    CHECK(find_homomorphisms(pattern, host2).size() == 1);
}

TEST_CASE("target order is preserved as a subsequence, extras allowed") {
    Metagraph pattern;
    pattern.add_expression(parse("(a c)"));
    Metagraph host;
    host.add_expression(parse("(a b c)"));
    const auto maps = find_homomorphisms(pattern, host);
    CHECK(maps.size() == 1);

    Metagraph reversed;
    reversed.add_expression(parse("(c b a)"));
    CHECK(find_homomorphisms(pattern, reversed).empty());
}

TEST_CASE("repeated pattern targets need repeated host occurrences") {
    Metagraph pattern;
    pattern.add_expression(parse("($x $x)"));
    Metagraph host1;
    host1.add_expression(parse("(a a)"));
    // $x can map to a (twice in the host list) and, degenerately, the whole
    // (a a) edge cannot contain itself twice.
    CHECK(find_homomorphisms(pattern, host1).size() == 1);

    Metagraph host2;
    host2.add_expression(parse("(a b)"));
    CHECK(find_homomorphisms(pattern, host2).empty());
}

TEST_CASE("non-injective homomorphisms are found") {
    Metagraph pattern;
    pattern.add_expression(parse("($x $y)"));
    Metagraph host;
    host.add_expression(parse("(a a)"));
    const auto maps = find_homomorphisms(pattern, host);
    // both variables may land on the same host vertex
    const bool has_merged = std::ranges::any_of(maps, [](const HomomorphismMap& m) {
        std::set<EdgeId> images;
        for (const auto& [p, h] : m.edge_map) images.insert(h);
        return images.size() < m.edge_map.size();
    });
    CHECK(has_merged);
}

TEST_CASE("find_homomorphisms equals the brute-force enumeration oracle") {
    oracle::Rng rng(347);
    const std::vector<std::string> symbols{"a", "b"};
    for (int round = 0; round < 60; ++round) {
        Metagraph pattern;
        pattern.add_expression(
            oracle::random_expression(rng, 1, symbols, {"x", "y"}, 0.5));
        if (rng.chance(0.4)) pattern.add_expression(parse("(: $x T0)"));

        Metagraph host = random_space(rng, 4, symbols, {}, true);

        std::vector<std::map<EdgeId, EdgeId>> got;
        for (const HomomorphismMap& m : find_homomorphisms(pattern, host)) {
            got.push_back(m.edge_map);
        }
        std::ranges::sort(got);
        CHECK(got == oracle::brute_homomorphisms(pattern, host, default_enrichments()));
    }
}

TEST_CASE("homomorphisms compose") {
    Metagraph a;
    a.add_expression(parse("(f $x)"));
    Metagraph b = load("(f $y)\n(f k)\n");
    Metagraph c = load("(f $z)\n(f k)\n(f m)\n(g k)\n");
    const auto first = find_homomorphisms(a, b);
    const auto second = find_homomorphisms(b, c);
    REQUIRE_FALSE(first.empty());
    REQUIRE_FALSE(second.empty());
    for (const HomomorphismMap& f : first) {
        for (const HomomorphismMap& g : second) {
            HomomorphismMap composed;
            for (const auto& [pe, be] : f.edge_map) {
                composed.edge_map.emplace(pe, g.edge_map.at(be));
            }
            CHECK(is_valid_homomorphism(a, c, composed));
        }
    }
}

TEST_CASE("results are lexicographic and honor the limit") {
    Metagraph pattern;
    pattern.add_expression(var("v"));
    Metagraph host = load("a\nb\nc\n");
    const auto all = find_homomorphisms(pattern, host);
    REQUIRE(all.size() == 3);
    for (std::size_t i = 1; i < all.size(); ++i) {
        CHECK(all[i - 1].edge_map.begin()->second < all[i].edge_map.begin()->second);
    }
    const auto limited = find_homomorphisms(pattern, host, 2);
    REQUIRE(limited.size() == 2);
    CHECK(limited[0].edge_map == all[0].edge_map);
    CHECK(limited[1].edge_map == all[1].edge_map);
}

TEST_CASE("ordering heuristics reorder the search but not the result set") {
    oracle::Rng rng(349);
    for (int round = 0; round < 20; ++round) {
        Metagraph pattern;
        pattern.add_expression(oracle::random_expression(rng, 1, {"a", "b"}, {"x"}, 0.4));
        Metagraph host = random_space(rng, 5, {"a", "b"}, {}, false);
        auto normalize = [](std::vector<HomomorphismMap> maps) {
            std::vector<std::map<EdgeId, EdgeId>> out;
            for (HomomorphismMap& m : maps) out.push_back(std::move(m.edge_map));
            std::ranges::sort(out);
            return out;
        };
        const auto base = normalize(find_homomorphisms(pattern, host));
        CHECK(normalize(find_homomorphisms(pattern, host, std::nullopt,
                                           label_selectivity_heuristic())) == base);
        CHECK(normalize(find_homomorphisms(pattern, host, std::nullopt,
                                           smallest_candidate_set_heuristic())) == base);
    }
}

// ---------------------------------------------------------------------------
// enriched matching

namespace {

Expression enriched_item(const std::string& name, std::vector<double> vec) {
    return parse("(item " + name + ")")
        .with_enrichment(Enrichment{"vector-f64", pack_doubles(vec)});
}

}  // namespace

TEST_CASE("one witness choice must cover every enriched pattern edge") {
    EnrichmentRegistry registry = EnrichmentRegistry::with_builtins();
    registry.register_kind(EnrichmentKind{
        "lin",
        {{"double", [](const Payload& p) {
              std::vector<double> v = unpack_doubles(p);
              for (double& x : v) x *= 2;
              return pack_doubles(v);
          }}},
        nullptr});
    const auto payload = [](double x) { return pack_doubles(std::vector<double>{x}); };

    Metagraph pattern;
    pattern.add_expression(Expression::list({
        Expression::symbol("p").with_enrichment(Enrichment{"lin", payload(1)}),
        Expression::symbol("q").with_enrichment(Enrichment{"lin", payload(3)}),
    }));

    // both enrichments doubled: one witness covers both pairs
    Metagraph consistent;
    consistent.add_expression(Expression::list({
        Expression::symbol("p").with_enrichment(Enrichment{"lin", payload(2)}),
        Expression::symbol("q").with_enrichment(Enrichment{"lin", payload(6)}),
    }));
    const auto good = find_homomorphisms(pattern, consistent, std::nullopt, nullptr, registry);
    REQUIRE(good.size() == 1);
    CHECK(good[0].witnesses.at("lin") == "double");

    // one doubled, one identical: no single witness works
    Metagraph mixed;
    mixed.add_expression(Expression::list({
        Expression::symbol("p").with_enrichment(Enrichment{"lin", payload(2)}),
        Expression::symbol("q").with_enrichment(Enrichment{"lin", payload(3)}),
    }));
    CHECK(find_homomorphisms(pattern, mixed, std::nullopt, nullptr, registry).empty());
}

TEST_CASE("match_enriched filters by payload proximity") {
    Metagraph space;
    space.add_expression(enriched_item("north", {0, 1}));
    space.add_expression(enriched_item("east", {1, 0}));
    space.add_expression(enriched_item("south", {0, -1}));
    space.add_expression(parse("(item plain)"));  // unenriched; never considered

    const Expression query = parse("(item $x)").with_enrichment(
        Enrichment{"vector-f64", pack_doubles(std::vector<double>{0.0, 1.0})});

    // proximities: north 1.0, east 0.5, south 0.0
    CHECK(match_enriched(space, query, "vector-f64", -0.1).size() == 3);
    CHECK(match_enriched(space, query, "vector-f64", 1.0).empty());
    const auto mid = match_enriched(space, query, "vector-f64", 0.6);
    REQUIRE(mid.size() == 1);
    CHECK(referent_text(mid[0].bindings, "x") == "north");

    CHECK_THROWS_AS(match_enriched(space, query, "no-such-kind", 0.5), UnknownKindError);
}

TEST_CASE("match_enriched equals the brute-force proximity filter") {
    oracle::Rng rng(353);
    const EnrichmentRegistry& registry = default_enrichments();
    for (int round = 0; round < 30; ++round) {
        Metagraph space;
        std::vector<std::pair<Expression, std::vector<double>>> items;
        const std::size_t n = 2 + rng.below(4);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> v{static_cast<double>(rng.below(7)) - 3,
                                  static_cast<double>(rng.below(7)) - 3};
            const Expression item = enriched_item("i" + std::to_string(i), v);
            space.add_expression(item);
            items.emplace_back(item, v);
        }
        std::vector<double> qv{static_cast<double>(rng.below(7)) - 3,
                               static_cast<double>(rng.below(7)) - 3};
        const Expression query =
            parse("(item $x)").with_enrichment(Enrichment{"vector-f64", pack_doubles(qv)});
        const double threshold = 0.25 * static_cast<double>(rng.below(5));

        std::set<std::string> expected;
        for (const auto& [item, v] : items) {
            const double p =
                registry.proximity("vector-f64", pack_doubles(qv), pack_doubles(v));
            if (p > threshold) expected.insert(item.child(1).to_text());
        }
        std::set<std::string> got;
        for (const MatchResult& m : match_enriched(space, query, "vector-f64", threshold)) {
            got.insert(referent_text(m.bindings, "x"));
        }
        CHECK(got == expected);
    }
}

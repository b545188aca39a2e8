#include "on2vec/dataset.hpp"
#include "on2vec/errors.hpp"
#include "on2vec/synthetic.hpp"

#include "generators.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

using namespace on2vec;

namespace {

std::vector<RelationMeta> single_transitive() { return {{0, "r", true, false, false, false}}; }

// Full closure of the chain n0 -> n1 -> ... -> n(len-1).
std::vector<RawTriple> closed_chain(std::size_t len) {
    std::vector<RawTriple> out;
    for (std::size_t i = 0; i < len; ++i)
        for (std::size_t j = i + 1; j < len; ++j) out.push_back({gen::name(i), "r", gen::name(j), 0});
    return out;
}

bool has(const OntologyGraph& g, const std::string& s, const std::string& t) {
    const auto a = g.find_concept(s), b = g.find_concept(t);
    return a && b && g.contains({*a, 0, *b});
}

std::set<Triple> as_set(const std::vector<Triple>& v) { return {v.begin(), v.end()}; }

} // namespace

TEST_CASE("truncation of a closed six-node chain") {
    const auto g = OntologyGraph::build(closed_chain(6), single_transitive());
    const auto out = truncate_transitive(g, 4);
    CHECK_FALSE(has(out.graph, "n0", "n5"));
    CHECK(has(out.graph, "n0", "n4"));
    CHECK(out.discarded == 1);
    CHECK(out.warnings.empty());

    // BFS over the chain's base edges decides every fact independently.
    std::vector<std::pair<ConceptId, ConceptId>> base;
    for (ConceptId i = 0; i + 1 < 6; ++i) base.emplace_back(i, i + 1);
    const auto dist = oracle::bfs_distances(6, base);
    for (const auto& t : g.triples()) {
        const auto s = std::stoul(g.concept_name(t.source).substr(1));
        const auto d = std::stoul(g.concept_name(t.target).substr(1));
        const int hops = dist.at({static_cast<ConceptId>(s), static_cast<ConceptId>(d)});
        CHECK(out.graph.contains(t) == (hops <= 4));
    }
}

TEST_CASE("one hop keeps only base edges") {
    const auto g = OntologyGraph::build(closed_chain(3), single_transitive());
    const auto out = truncate_transitive(g, 1);
    CHECK(out.graph.num_triples() == 2);
    CHECK(has(out.graph, "n0", "n1"));
    CHECK(has(out.graph, "n1", "n2"));
}

TEST_CASE("non-transitive relations pass through") {
    std::mt19937_64 rng(3);
    std::vector<RelationMeta> meta{{0, "near", false, true, false, false}, {1, "about", false, false, false, false}};
    const auto g = OntologyGraph::build(gen::random_raw(rng, 10, 60, meta), meta);
    const auto out = truncate_transitive(g, 1);
    CHECK(out.graph.triples() == g.triples());
    CHECK(out.discarded == 0);
}

TEST_CASE("cycles are kept with a warning") {
    const auto g = OntologyGraph::build(
        std::vector<RawTriple>{{"a", "r", "b", 1}, {"b", "r", "c", 2}, {"c", "r", "a", 3}, {"a", "r", "c", 4}},
        single_transitive());
    const auto out = truncate_transitive(g, 1);
    CHECK(out.graph.num_triples() == 4);
    REQUIRE(out.warnings.size() == 1);
    CHECK(out.warnings[0].find("'r'") != std::string::npos);
}

TEST_CASE("max hops below one is rejected") {
    const auto g = OntologyGraph::build(closed_chain(3), single_transitive());
    CHECK_THROWS_AS(truncate_transitive(g, 0), InputError);
}

TEST_CASE("property: truncation is idempotent on random closed DAGs") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        const auto raw = gen::random_closed_dag(rng, 12, 0.2, "r");
        if (raw.empty()) continue;
        const auto g = OntologyGraph::build(raw, single_transitive());
        const int hops = 1 + trial % 4;
        const auto once = truncate_transitive(g, hops);
        const auto twice = truncate_transitive(once.graph, hops);
        REQUIRE(twice.graph.triples() == once.graph.triples());
        CHECK(twice.discarded == 0);
    }
}

TEST_CASE("property: kept facts agree with a BFS over the transitive reduction") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 10;
        const auto raw = gen::random_closed_dag(rng, n, 0.25, "r");
        if (raw.empty()) continue;
        std::set<std::pair<std::size_t, std::size_t>> closure;
        for (const auto& t : raw) closure.emplace(std::stoul(t.source.substr(1)), std::stoul(t.target.substr(1)));
        std::vector<std::pair<ConceptId, ConceptId>> reduction;
        for (auto [s, t] : closure) {
            bool bypass = false;
            for (std::size_t m = 0; m < n && !bypass; ++m) bypass = closure.count({s, m}) && closure.count({m, t});
            if (!bypass) reduction.emplace_back(static_cast<ConceptId>(s), static_cast<ConceptId>(t));
        }
        const auto dist = oracle::bfs_distances(n, reduction);
        const auto g = OntologyGraph::build(raw, single_transitive());
        const auto out = truncate_transitive(g, 2);
        for (auto [s, t] : closure) {
            const int hops = dist.at({static_cast<ConceptId>(s), static_cast<ConceptId>(t)});
            REQUIRE(has(out.graph, gen::name(s), gen::name(t)) == (hops <= 2));
        }
    }
}

TEST_CASE("split sizes follow the fractions") {
    std::vector<RawTriple> grid;
    for (int s = 0; s < 4; ++s)
        for (int t = 0; t < 4; ++t)
            if (s != t && grid.size() < 10) grid.push_back({gen::name(s), "r", gen::name(t), 0});
    const auto small = OntologyGraph::build(grid, {{0, "r", false, false, false, false}});
    REQUIRE(small.num_triples() == 10);
    const auto split = split_dataset(small, {0.8, 0.1, 0.1}, 1);
    CHECK(split.train.size() == 8);
    CHECK(split.valid.size() == 1);
    CHECK(split.test.size() == 1);
}

TEST_CASE("split is deterministic under its seed") {
    std::mt19937_64 rng(4);
    const auto g = gen::random_graph(rng, 20, 200);
    const auto a = split_dataset(g, {0.8, 0.1, 0.1}, 9);
    const auto b = split_dataset(g, {0.8, 0.1, 0.1}, 9);
    CHECK(a.train == b.train);
    CHECK(a.valid == b.valid);
    CHECK(a.test == b.test);
    const auto c = split_dataset(g, {0.8, 0.1, 0.1}, 10);
    CHECK((c.valid != a.valid || c.test != a.test));
}

TEST_CASE("split of a 100-triple synthetic graph partitions the set") {
    SyntheticSpec spec;
    spec.concepts = 40;
    spec.triples = 100;
    const auto synth = generate_synthetic_ontology(spec, 2);
    const auto& g = synth.graph;
    const auto split = split_dataset(g, {0.5, 0.25, 0.25}, 3);
    const auto tr = as_set(split.train), va = as_set(split.valid), te = as_set(split.test);
    CHECK(tr.size() + va.size() + te.size() == g.num_triples());
    std::set<Triple> all = tr;
    all.insert(va.begin(), va.end());
    all.insert(te.begin(), te.end());
    CHECK(all == as_set(g.triples()));
    CHECK(split.valid.size() == static_cast<std::size_t>(std::llround(g.num_triples() * 0.25)));
}

TEST_CASE("property: splits partition and cover on random graphs") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 25; ++trial) {
        const auto g = gen::random_graph(rng, 15, 150);
        const auto split = split_dataset(g, {0.7, 0.15, 0.15}, trial);
        std::set<Triple> all;
        for (const auto* part : {&split.train, &split.valid, &split.test})
            for (const auto& t : *part) REQUIRE(all.insert(t).second);
        REQUIRE(all == as_set(g.triples()));

        std::set<ConceptId> seen_c;
        std::set<RelationId> seen_r;
        for (const auto& t : split.train) {
            seen_c.insert({t.source, t.target});
            seen_r.insert(t.relation);
        }
        for (const auto* part : {&split.valid, &split.test})
            for (const auto& t : *part) {
                CHECK(seen_c.count(t.source));
                CHECK(seen_c.count(t.target));
                CHECK(seen_r.count(t.relation));
            }
    }
}

TEST_CASE("split fractions are validated") {
    std::mt19937_64 rng(2);
    const auto g = gen::random_graph(rng, 10, 50);
    CHECK_THROWS_AS(split_dataset(g, {0.8, 0.2, 0.0}, 1), InputError);
    CHECK_THROWS_AS(split_dataset(g, {0.8, 0.1, 0.2}, 1), InputError);
    CHECK_THROWS_AS(split_dataset(g, {-0.1, 0.6, 0.5}, 1), InputError);
}

TEST_CASE("split reports uncoverable symbols") {
    std::vector<RawTriple> raw;
    for (int i = 0; i < 10; ++i) raw.push_back({gen::name(2 * i), "r", gen::name(2 * i + 1), 0});
    const auto g = OntologyGraph::build(raw, {{0, "r", false, false, false, false}});
    CHECK_THROWS_AS(split_dataset(g, {0.8, 0.1, 0.1}, 1), InputError);
}

TEST_CASE("dataset stats by hand") {
    const auto g = OntologyGraph::build(
        std::vector<RawTriple>{{"a", "isA", "b", 0},
                               {"b", "isA", "c", 0},
                               {"a", "hasPart", "d", 0},
                               {"c", "before", "d", 0},
                               {"d", "near", "e", 0},
                               {"e", "near", "d", 0},
                               {"a", "about", "e", 0},
                               {"b", "about", "f", 0},
                               {"c", "about", "a", 0},
                               {"f", "hasPart", "g", 0}},
        gen::mixed_relations());
    const auto s = dataset_stats(g);
    CHECK(s.triples == 10);
    CHECK(s.with_property == 5);  // isA x2, before, near x2
    CHECK(s.hierarchical == 4);   // isA x2, hasPart x2
    CHECK(s.relations == 5);
    CHECK(s.concepts == 7);
    CHECK(s.pct_property() == doctest::Approx(50.0));
    CHECK(s.pct_hierarchical() == doctest::Approx(40.0));
}

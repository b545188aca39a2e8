#pragma once

// Hand-rolled generators for property tests.

#include "on2vec/graph.hpp"

#include <random>
#include <string>
#include <vector>

namespace gen {

using namespace on2vec;

inline std::vector<RelationMeta> mixed_relations() {
    return {
        {0, "isA", true, false, false, true},
        {1, "hasPart", false, false, true, false},
        {2, "before", true, false, false, false},
        {3, "near", false, true, false, false},
        {4, "about", false, false, false, false},
    };
}

inline std::string name(std::size_t i) { return "n" + std::to_string(i); }

// Uniform random triples over `concepts` names, duplicates and reflexive
// facts included.
inline std::vector<RawTriple> random_raw(std::mt19937_64& rng, std::size_t concepts, std::size_t count,
                                         const std::vector<RelationMeta>& meta) {
    std::uniform_int_distribution<std::size_t> c(0, concepts - 1), r(0, meta.size() - 1);
    std::vector<RawTriple> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back({name(c(rng)), meta[r(rng)].name, name(c(rng)), i + 1});
    return out;
}

inline OntologyGraph random_graph(std::mt19937_64& rng, std::size_t concepts, std::size_t count) {
    return OntologyGraph::build(random_raw(rng, concepts, count, mixed_relations()), mixed_relations());
}

// Random DAG over one transitive relation stored with its full closure.
// Edges only go from lower to higher index, so no cycles arise.
inline std::vector<RawTriple> random_closed_dag(std::mt19937_64& rng, std::size_t nodes, double density,
                                                const std::string& relation) {
    std::bernoulli_distribution edge(density);
    std::vector<std::vector<bool>> reach(nodes, std::vector<bool>(nodes, false));
    for (std::size_t i = 0; i < nodes; ++i)
        for (std::size_t j = i + 1; j < nodes; ++j) reach[i][j] = edge(rng);
    for (std::size_t k = 0; k < nodes; ++k)
        for (std::size_t i = 0; i < nodes; ++i)
            for (std::size_t j = 0; j < nodes; ++j)
                if (reach[i][k] && reach[k][j]) reach[i][j] = true;
    std::vector<RawTriple> out;
    for (std::size_t i = 0; i < nodes; ++i)
        for (std::size_t j = 0; j < nodes; ++j)
            if (reach[i][j]) out.push_back({name(i), relation, name(j), 0});
    return out;
}

} // namespace gen

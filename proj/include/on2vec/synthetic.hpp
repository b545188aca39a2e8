#pragma once

#include "on2vec/dataset.hpp"
#include "on2vec/graph.hpp"

#include <cstdint>
#include <vector>

namespace on2vec {

// Target shape of a generated ontology. `prop` and `hier` are the fractions
// of triples whose relation carries a relational property / is hierarchical.
struct SyntheticSpec {
    int concepts = 200;
    int triples = 2000;
    double prop = 0.60;
    double hier = 0.50;
    SplitFractions split{0.8, 0.1, 0.1};

    bool operator==(const SyntheticSpec&) const = default;
};

struct SyntheticOntology {
    OntologyGraph graph;
    DatasetSplit split;
};

// isA (transitive coercion), hasPart (refinement), precedes (transitive),
// similarTo (symmetric), relatedTo and usedFor (plain).
std::vector<RelationMeta> synthetic_relations();

// Seeded generator built from concept roles: a class forest with items
// filed under it (isA stored with every ancestor, depth <= 4), part kits
// shared by the wholes of a class (hasPart), windowed sequences stored with
// their closure up to four steps (precedes), cliques of same-class wholes in
// both directions (similarTo), and class-to-class plain links. No unordered
// concept pair carries two different relations. Measured property/hierarchy
// percentages land within 5 points of the request, otherwise InputError
// explains the infeasible mix.
SyntheticOntology generate_synthetic_ontology(const SyntheticSpec& spec, std::uint64_t seed);

} // namespace on2vec

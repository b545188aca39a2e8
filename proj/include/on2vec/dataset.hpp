#pragma once

#include "on2vec/graph.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace on2vec {

struct TruncationResult {
    OntologyGraph graph;
    std::size_t discarded = 0;
    // One line per transitive relation whose fact set contains a cycle.
    std::vector<std::string> warnings;
};

// Drops facts (s, r, t) of every transitive r whose shortest path from s to t
// over the base edges of r is longer than `max_hops`. A base edge (s, r, t)
// has no intermediate m with (s, r, m) and (m, r, t) in G. Facts touching a
// cycle of r are kept and reported.
TruncationResult truncate_transitive(const OntologyGraph& g, int max_hops);

struct SplitFractions {
    double train = 0.8;
    double valid = 0.1;
    double test = 0.1;

    bool operator==(const SplitFractions&) const = default;
};

struct DatasetSplit {
    std::vector<Triple> train;
    std::vector<Triple> valid;
    std::vector<Triple> test;
};

// Seeded random partition of the triple set. One covering triple per concept
// and relation is pinned into train first, so valid/test only use symbols
// seen in training. Within each part triples keep graph order.
DatasetSplit split_dataset(const OntologyGraph& g, SplitFractions fractions, std::uint64_t seed);

// Counts in the style of a dataset statistics table.
struct DatasetStats {
    std::size_t triples = 0;
    std::size_t with_property = 0;
    std::size_t hierarchical = 0;
    std::size_t relations = 0;
    std::size_t concepts = 0;

    double pct_property() const { return triples ? 100.0 * with_property / triples : 0.0; }
    double pct_hierarchical() const { return triples ? 100.0 * hierarchical / triples : 0.0; }
};

// `concepts` counts concepts that occur in at least one triple.
DatasetStats dataset_stats(const OntologyGraph& g);

} // namespace on2vec

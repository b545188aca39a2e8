#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace on2vec {

using ConceptId = std::uint32_t;
using RelationId = std::uint32_t;

// Property flags of one semantic relation. A relation with no flag set is a
// plain ("other") relation.
struct RelationMeta {
    RelationId id = 0;
    std::string name;
    bool transitive = false;
    bool symmetric = false;
    bool refinement = false;
    bool coercion = false;

    bool hierarchical() const { return refinement || coercion; }
    bool has_property() const { return transitive || symmetric; }
    bool is_other() const { return !has_property() && !hierarchical(); }

    bool operator==(const RelationMeta&) const = default;
};

struct Triple {
    ConceptId source = 0;
    RelationId relation = 0;
    ConceptId target = 0;

    auto operator<=>(const Triple&) const = default;
};

// A triple as read from text, before ids are assigned. `line` is 1-based, 0
// when the triple did not come from a file.
struct RawTriple {
    std::string source;
    std::string relation;
    std::string target;
    std::size_t line = 0;

    bool operator==(const RawTriple& o) const {
        return source == o.source && relation == o.relation && target == o.target;
    }
};

struct TripleHash {
    std::size_t operator()(const Triple& t) const noexcept;
};

// Immutable concept graph G(C, R) with a pair index (s, t) -> relations and
// the refine index (c, r) -> directly finer concepts.
//
// Several graphs may share one registry of concept and relation ids (the
// train/valid/test views of a dataset); `with_triples` builds such views.
class OntologyGraph {
public:
    OntologyGraph() = default;

    // Builds from named triples. Concept ids follow first appearance;
    // relation ids follow the order of `meta`. Duplicate triples collapse.
    static OntologyGraph build(std::span<const RawTriple> triples,
                               std::vector<RelationMeta> meta);

    // Builds over an existing registry. Every id must be in range.
    OntologyGraph(std::vector<std::string> concept_names,
                  std::vector<RelationMeta> relations,
                  std::span<const Triple> triples);

    // Same registry, different fact set.
    OntologyGraph with_triples(std::span<const Triple> triples) const;

    std::size_t num_concepts() const { return concept_names_.size(); }
    std::size_t num_relations() const { return relations_.size(); }
    std::size_t num_triples() const { return triples_.size(); }

    const std::vector<Triple>& triples() const { return triples_; }
    const std::vector<RelationMeta>& relations() const { return relations_; }
    const RelationMeta& relation(RelationId r) const;
    const std::vector<std::string>& concept_names() const { return concept_names_; }
    const std::string& concept_name(ConceptId c) const;

    std::optional<ConceptId> find_concept(std::string_view name) const;
    std::optional<RelationId> find_relation(std::string_view name) const;

    bool contains(const Triple& t) const { return triple_set_.count(t) != 0; }

    // Relations r with (s, r, t) in G, ascending. Throws InputError on
    // unknown ids.
    std::vector<RelationId> relations_between(ConceptId s, ConceptId t) const;

    // sigma(c, r): for a refinement r the targets of (c, r, *), for a
    // coercion r the sources of (*, r, c). Ascending. Throws
    // ContractViolation when r is not hierarchical.
    std::vector<ConceptId> refine(ConceptId c, RelationId r) const;
    bool in_refine(ConceptId c, RelationId r, ConceptId finer) const;

    // Hierarchical relations that have at least one fact.
    std::vector<RelationId> populated_hierarchical_relations() const;

    // Named triples in internal order.
    std::vector<RawTriple> to_raw() const;

    // Number of distinct (s, t) keys in the pair index.
    std::size_t num_pairs() const { return by_pair_.size(); }

private:
    static std::uint64_t key(std::uint32_t a, std::uint32_t b) {
        return (std::uint64_t{a} << 32) | b;
    }
    void index();
    void check_concept(ConceptId c) const;

    std::vector<std::string> concept_names_;
    std::unordered_map<std::string, ConceptId> concept_lookup_;
    std::vector<RelationMeta> relations_;
    std::vector<Triple> triples_;
    std::unordered_map<Triple, char, TripleHash> triple_set_;
    std::unordered_map<std::uint64_t, std::vector<RelationId>> by_pair_;
    std::unordered_map<std::uint64_t, std::vector<ConceptId>> sigma_;
};

// Validates the flag invariants of a relation registry (unique names,
// refinement excludes coercion, ids dense and ordered).
void validate_relations(std::span<const RelationMeta> meta);

} // namespace on2vec

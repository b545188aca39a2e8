#include "on2vec/graph.hpp"

#include "on2vec/errors.hpp"

#include <algorithm>
#include <unordered_set>

namespace on2vec {

std::size_t TripleHash::operator()(const Triple& t) const noexcept {
    std::uint64_t h = t.source;
    h = h * 0x9E3779B97F4A7C15ull ^ t.relation;
    h = h * 0x9E3779B97F4A7C15ull ^ t.target;
    return static_cast<std::size_t>(h ^ (h >> 29));
}

void validate_relations(std::span<const RelationMeta> meta) {
    std::unordered_set<std::string> names;
    for (std::size_t i = 0; i < meta.size(); ++i) {
        const auto& m = meta[i];
        if (m.id != i)
            throw InputError("relation '" + m.name + "' has id " + std::to_string(m.id) +
                             ", expected " + std::to_string(i));
        if (m.name.empty()) throw InputError("relation with empty name");
        if (!names.insert(m.name).second)
            throw InputError("duplicate relation name '" + m.name + "'");
        if (m.refinement && m.coercion)
            throw InputError("relation '" + m.name + "' is flagged both refinement and coercion");
    }
}

OntologyGraph OntologyGraph::build(std::span<const RawTriple> raw,
                                   std::vector<RelationMeta> meta) {
    for (std::size_t i = 0; i < meta.size(); ++i) meta[i].id = static_cast<RelationId>(i);
    validate_relations(meta);

    std::unordered_map<std::string, RelationId> rel_lookup;
    for (const auto& m : meta) rel_lookup.emplace(m.name, m.id);

    OntologyGraph g;
    g.relations_ = std::move(meta);
    auto intern = [&g](const std::string& name) {
        auto [it, fresh] = g.concept_lookup_.emplace(name, static_cast<ConceptId>(g.concept_names_.size()));
        if (fresh) g.concept_names_.push_back(name);
        return it->second;
    };
    for (const auto& t : raw) {
        auto rel = rel_lookup.find(t.relation);
        if (rel == rel_lookup.end()) {
            std::string where = t.line ? "line " + std::to_string(t.line) : "triple";
            throw InputError(where + ": unknown relation '" + t.relation + "'");
        }
        if (t.source.empty() || t.target.empty()) {
            std::string where = t.line ? "line " + std::to_string(t.line) : "triple";
            throw InputError(where + ": empty concept name");
        }
        Triple tr{intern(t.source), rel->second, intern(t.target)};
        if (g.triple_set_.emplace(tr, 0).second) g.triples_.push_back(tr);
    }
    g.index();
    return g;
}

OntologyGraph::OntologyGraph(std::vector<std::string> concept_names,
                             std::vector<RelationMeta> relations,
                             std::span<const Triple> triples)
    : concept_names_(std::move(concept_names)), relations_(std::move(relations)) {
    validate_relations(relations_);
    for (std::size_t i = 0; i < concept_names_.size(); ++i) {
        if (!concept_lookup_.emplace(concept_names_[i], static_cast<ConceptId>(i)).second)
            throw InputError("duplicate concept name '" + concept_names_[i] + "'");
    }
    for (const auto& t : triples) {
        if (t.source >= concept_names_.size() || t.target >= concept_names_.size() ||
            t.relation >= relations_.size())
            throw InputError("triple references an id outside the registry");
        if (triple_set_.emplace(t, 0).second) triples_.push_back(t);
    }
    index();
}

OntologyGraph OntologyGraph::with_triples(std::span<const Triple> triples) const {
    OntologyGraph g;
    g.concept_names_ = concept_names_;
    g.concept_lookup_ = concept_lookup_;
    g.relations_ = relations_;
    for (const auto& t : triples) {
        if (t.source >= num_concepts() || t.target >= num_concepts() || t.relation >= num_relations())
            throw InputError("triple references an id outside the registry");
        if (g.triple_set_.emplace(t, 0).second) g.triples_.push_back(t);
    }
    g.index();
    return g;
}

void OntologyGraph::index() {
    by_pair_.clear();
    sigma_.clear();
    for (const auto& t : triples_) {
        by_pair_[key(t.source, t.target)].push_back(t.relation);
        const auto& m = relations_[t.relation];
        if (m.refinement) sigma_[key(t.source, t.relation)].push_back(t.target);
        else if (m.coercion) sigma_[key(t.target, t.relation)].push_back(t.source);
    }
    for (auto& [k, v] : by_pair_) std::sort(v.begin(), v.end());
    for (auto& [k, v] : sigma_) std::sort(v.begin(), v.end());
}

const RelationMeta& OntologyGraph::relation(RelationId r) const {
    if (r >= relations_.size()) throw InputError("unknown relation id " + std::to_string(r));
    return relations_[r];
}

const std::string& OntologyGraph::concept_name(ConceptId c) const {
    check_concept(c);
    return concept_names_[c];
}

void OntologyGraph::check_concept(ConceptId c) const {
    if (c >= concept_names_.size()) throw InputError("unknown concept id " + std::to_string(c));
}

std::optional<ConceptId> OntologyGraph::find_concept(std::string_view name) const {
    auto it = concept_lookup_.find(std::string(name));
    if (it == concept_lookup_.end()) return std::nullopt;
    return it->second;
}

std::optional<RelationId> OntologyGraph::find_relation(std::string_view name) const {
    for (const auto& m : relations_)
        if (m.name == name) return m.id;
    return std::nullopt;
}

std::vector<RelationId> OntologyGraph::relations_between(ConceptId s, ConceptId t) const {
    check_concept(s);
    check_concept(t);
    auto it = by_pair_.find(key(s, t));
    if (it == by_pair_.end()) return {};
    return it->second;
}

std::vector<ConceptId> OntologyGraph::refine(ConceptId c, RelationId r) const {
    check_concept(c);
    if (!relation(r).hierarchical())
        throw ContractViolation("refine: relation '" + relations_[r].name + "' is not hierarchical");
    auto it = sigma_.find(key(c, r));
    if (it == sigma_.end()) return {};
    return it->second;
}

bool OntologyGraph::in_refine(ConceptId c, RelationId r, ConceptId finer) const {
    const auto& m = relation(r);
    if (!m.hierarchical())
        throw ContractViolation("refine: relation '" + m.name + "' is not hierarchical");
    return m.refinement ? contains({c, r, finer}) : contains({finer, r, c});
}

std::vector<RelationId> OntologyGraph::populated_hierarchical_relations() const {
    std::vector<char> seen(relations_.size(), 0);
    for (const auto& t : triples_) seen[t.relation] = 1;
    std::vector<RelationId> out;
    for (const auto& m : relations_)
        if (m.hierarchical() && seen[m.id]) out.push_back(m.id);
    return out;
}

std::vector<RawTriple> OntologyGraph::to_raw() const {
    std::vector<RawTriple> out;
    out.reserve(triples_.size());
    for (const auto& t : triples_)
        out.push_back({concept_names_[t.source], relations_[t.relation].name, concept_names_[t.target], 0});
    return out;
}

} // namespace on2vec

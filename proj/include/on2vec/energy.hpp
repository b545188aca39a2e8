#pragma once

#include "on2vec/graph.hpp"
#include "on2vec/params.hpp"

#include <map>
#include <span>
#include <variant>
#include <vector>

namespace on2vec {

// Sparse gradient: only parameters touched by the contributing terms have
// entries. Ordered maps keep reductions deterministic.
struct GradientSlice {
    std::map<ConceptId, Vector> concepts;
    std::map<RelationId, Vector> relations;
    std::map<RelationId, Matrix> proj1;
    std::map<RelationId, Matrix> proj2;

    // Zero-initialised accumulators.
    Vector& concept_at(ConceptId c, int k);
    Vector& relation_at(RelationId r, int k);
    Matrix& proj1_at(RelationId r, int k);
    Matrix& proj2_at(RelationId r, int k);

    bool empty() const { return concepts.empty() && relations.empty() && proj1.empty() && proj2.empty(); }
    bool all_finite() const;
    GradientSlice& operator+=(const GradientSlice& other);
};

// S_d = || M1 s + r - M2 t || under the chosen norm.
double dissimilarity(const ModelParams& p, const Triple& t, NormOrder norm);

// S_d with the translation vector of `translation` but the projections of
// t.relation.
double dissimilarity_with_translation(const ModelParams& p, const Triple& t,
                                      RelationId translation, NormOrder norm);

// 1 - cos(u, v). A zero-norm argument yields 1.
double cosine_distance(const Vector& u, const Vector& v);

enum class HierarchySide { refinement, coercion };

// [S_d(s, r, t) - S_d(s, r', t) + margin]_+ where the corrupted score keeps
// the projections of r and swaps only the translation vector.
struct CsmTerm {
    Triple positive;
    RelationId negative = 0;
    double margin = 0.5;
    NormOrder norm = NormOrder::l2;
};

// Refinement: [w(M1 s + r, M2 t) - w(M1 s + r, M2 t') + margin]_+, with the
// negative concept replacing the target.
// Coercion: [w(M2 t - r, M1 s) - w(M2 t - r, M1 s') + margin]_+, with the
// negative concept replacing the source.
struct HmTerm {
    Triple positive;
    ConceptId negative = 0;
    HierarchySide side = HierarchySide::refinement;
    double margin = 0.5;
};

// One member of the concept batch of the soft constraint: the concept, the
// relation whose projections apply, and which projections apply.
struct NormEntry {
    ConceptId concept_id = 0;
    RelationId relation = 0;
    bool source = false;
    bool target = false;

    auto operator<=>(const NormEntry&) const = default;
};

// Sum over distinct concepts of [||c|| - 1]_+, over entries of
// [||M1 c|| - 1]_+ (source) and [||M2 c|| - 1]_+ (target), and over relations
// of [||r|| - 2]_+. Euclidean norms throughout.
struct NormTerm {
    std::vector<NormEntry> concepts;
    std::vector<RelationId> relations;
};

using LossTerm = std::variant<CsmTerm, HmTerm, NormTerm>;

double csm_term(const ModelParams& p, const Triple& t, RelationId negative, double gamma1, NormOrder norm);
double hm_refinement_term(const ModelParams& p, ConceptId s, RelationId r, ConceptId t, ConceptId t_neg,
                          double gamma2);
double hm_coercion_term(const ModelParams& p, ConceptId t, RelationId r, ConceptId s, ConceptId s_neg,
                        double gamma2);
double norm_penalty(const ModelParams& p, std::span<const NormEntry> concepts,
                    std::span<const RelationId> relations);

double loss(const ModelParams& p, const LossTerm& term);

// Adds scale * d(term)/d(theta) into `out` and returns the term's loss. An
// inactive hinge (argument <= 0) adds nothing.
double accumulate_gradient(const ModelParams& p, const LossTerm& term, double scale, GradientSlice& out);

GradientSlice gradients(const ModelParams& p, const LossTerm& term);

// Throw ContractViolation when the negative sample is not a valid corruption
// with respect to g.
void check_negative(const OntologyGraph& g, const CsmTerm& term);
void check_negative(const OntologyGraph& g, const HmTerm& term);

} // namespace on2vec

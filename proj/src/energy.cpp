#include "on2vec/energy.hpp"

#include "on2vec/errors.hpp"

#include <cmath>
#include <set>

namespace on2vec {

Vector& GradientSlice::concept_at(ConceptId c, int k) {
    auto it = concepts.find(c);
    if (it == concepts.end()) it = concepts.emplace(c, Vector::Zero(k)).first;
    return it->second;
}

Vector& GradientSlice::relation_at(RelationId r, int k) {
    auto it = relations.find(r);
    if (it == relations.end()) it = relations.emplace(r, Vector::Zero(k)).first;
    return it->second;
}

Matrix& GradientSlice::proj1_at(RelationId r, int k) {
    auto it = proj1.find(r);
    if (it == proj1.end()) it = proj1.emplace(r, Matrix::Zero(k, k)).first;
    return it->second;
}

Matrix& GradientSlice::proj2_at(RelationId r, int k) {
    auto it = proj2.find(r);
    if (it == proj2.end()) it = proj2.emplace(r, Matrix::Zero(k, k)).first;
    return it->second;
}

bool GradientSlice::all_finite() const {
    for (const auto& [id, v] : concepts)
        if (!v.allFinite()) return false;
    for (const auto& [id, v] : relations)
        if (!v.allFinite()) return false;
    for (const auto& [id, m] : proj1)
        if (!m.allFinite()) return false;
    for (const auto& [id, m] : proj2)
        if (!m.allFinite()) return false;
    return true;
}

namespace {

template <class Map>
void merge(Map& into, const Map& from) {
    for (const auto& [id, x] : from) {
        auto it = into.find(id);
        if (it == into.end()) into.emplace(id, x);
        else it->second += x;
    }
}

double norm_of(const Vector& e, NormOrder norm) {
    return norm == NormOrder::l1 ? e.lpNorm<1>() : e.norm();
}

// d||e|| / de. Zero at the kinks: sign(0) = 0 for l1, e = 0 for l2.
Vector norm_gradient(const Vector& e, NormOrder norm) {
    if (norm == NormOrder::l1)
        return e.unaryExpr([](double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); });
    const double n = e.norm();
    if (n == 0.0) return Vector::Zero(e.size());
    return e / n;
}

struct CosineGrad {
    Vector du;
    Vector dv;
};

CosineGrad cosine_gradient(const Vector& u, const Vector& v) {
    const double nu = u.norm(), nv = v.norm();
    if (nu == 0.0 || nv == 0.0) return {Vector::Zero(u.size()), Vector::Zero(v.size())};
    const double dot = u.dot(v);
    const double inv = 1.0 / (nu * nv);
    return {-v * inv + u * (dot * inv / (nu * nu)), -u * inv + v * (dot * inv / (nv * nv))};
}

void check_ids(const ModelParams& p, const Triple& t) {
    if (t.source >= p.num_concepts() || t.target >= p.num_concepts())
        throw InputError("concept id out of range for these parameters");
    if (t.relation >= p.num_relations()) throw InputError("relation id out of range for these parameters");
}

Vector residual(const ModelParams& p, const Triple& t, RelationId translation) {
    return p.proj1[t.relation] * p.concepts[t.source] + p.relations[translation] -
           p.proj2[t.relation] * p.concepts[t.target];
}

double csm_accumulate(const ModelParams& p, const CsmTerm& term, double scale, GradientSlice* out) {
    const Triple& t = term.positive;
    check_ids(p, t);
    if (term.negative >= p.num_relations()) throw InputError("negative relation id out of range");
    if (term.negative == t.relation)
        throw ContractViolation("csm term: negative relation equals the positive relation");

    const Vector pos = residual(p, t, t.relation);
    const Vector neg = residual(p, t, term.negative);
    const double arg = norm_of(pos, term.norm) - norm_of(neg, term.norm) + term.margin;
    if (arg <= 0.0) return 0.0;
    if (out) {
        const int k = p.k;
        const Vector gp = norm_gradient(pos, term.norm);
        const Vector gn = norm_gradient(neg, term.norm);
        const Vector diff = gp - gn;
        const Vector& s = p.concepts[t.source];
        const Vector& tv = p.concepts[t.target];
        out->concept_at(t.source, k).noalias() += scale * (p.proj1[t.relation].transpose() * diff);
        out->concept_at(t.target, k).noalias() -= scale * (p.proj2[t.relation].transpose() * diff);
        out->relation_at(t.relation, k) += scale * gp;
        out->relation_at(term.negative, k) -= scale * gn;
        out->proj1_at(t.relation, k).noalias() += scale * diff * s.transpose();
        out->proj2_at(t.relation, k).noalias() -= scale * diff * tv.transpose();
    }
    return arg;
}

double hm_accumulate(const ModelParams& p, const HmTerm& term, double scale, GradientSlice* out) {
    const Triple& t = term.positive;
    check_ids(p, t);
    if (term.negative >= p.num_concepts()) throw InputError("negative concept id out of range");
    const int k = p.k;
    const RelationId r = t.relation;
    const Matrix& m1 = p.proj1[r];
    const Matrix& m2 = p.proj2[r];

    if (term.side == HierarchySide::refinement) {
        const Vector anchor = m1 * p.concepts[t.source] + p.relations[r];
        const Vector b = m2 * p.concepts[t.target];
        const Vector bn = m2 * p.concepts[term.negative];
        const double arg = cosine_distance(anchor, b) - cosine_distance(anchor, bn) + term.margin;
        if (arg <= 0.0) return 0.0;
        if (out) {
            const auto gpos = cosine_gradient(anchor, b);
            const auto gneg = cosine_gradient(anchor, bn);
            const Vector ga = gpos.du - gneg.du;
            const Vector gb = gpos.dv;
            const Vector gbn = -gneg.dv;
            out->concept_at(t.source, k).noalias() += scale * (m1.transpose() * ga);
            out->relation_at(r, k) += scale * ga;
            out->proj1_at(r, k).noalias() += scale * ga * p.concepts[t.source].transpose();
            out->concept_at(t.target, k).noalias() += scale * (m2.transpose() * gb);
            out->concept_at(term.negative, k).noalias() += scale * (m2.transpose() * gbn);
            Matrix& d2 = out->proj2_at(r, k);
            d2.noalias() += scale * gb * p.concepts[t.target].transpose();
            d2.noalias() += scale * gbn * p.concepts[term.negative].transpose();
        }
        return arg;
    }

    const Vector anchor = m2 * p.concepts[t.target] - p.relations[r];
    const Vector b = m1 * p.concepts[t.source];
    const Vector bn = m1 * p.concepts[term.negative];
    const double arg = cosine_distance(anchor, b) - cosine_distance(anchor, bn) + term.margin;
    if (arg <= 0.0) return 0.0;
    if (out) {
        const auto gpos = cosine_gradient(anchor, b);
        const auto gneg = cosine_gradient(anchor, bn);
        const Vector ga = gpos.du - gneg.du;
        const Vector gb = gpos.dv;
        const Vector gbn = -gneg.dv;
        out->concept_at(t.target, k).noalias() += scale * (m2.transpose() * ga);
        out->relation_at(r, k) -= scale * ga;
        out->proj2_at(r, k).noalias() += scale * ga * p.concepts[t.target].transpose();
        out->concept_at(t.source, k).noalias() += scale * (m1.transpose() * gb);
        out->concept_at(term.negative, k).noalias() += scale * (m1.transpose() * gbn);
        Matrix& d1 = out->proj1_at(r, k);
        d1.noalias() += scale * gb * p.concepts[t.source].transpose();
        d1.noalias() += scale * gbn * p.concepts[term.negative].transpose();
    }
    return arg;
}

double norm_accumulate(const ModelParams& p, const NormTerm& term, double scale, GradientSlice* out) {
    const int k = p.k;
    double total = 0.0;
    std::set<ConceptId> distinct;
    for (const auto& e : term.concepts) {
        if (e.concept_id >= p.num_concepts()) throw InputError("concept id out of range");
        if (e.relation >= p.num_relations()) throw InputError("relation id out of range");
        distinct.insert(e.concept_id);
    }
    for (ConceptId c : distinct) {
        const Vector& v = p.concepts[c];
        const double n = v.norm();
        if (n - 1.0 <= 0.0) continue;
        total += n - 1.0;
        if (out) out->concept_at(c, k) += scale * (v / n);
    }
    auto projected = [&](const Matrix& m, ConceptId c, bool first, RelationId r) {
        const Vector& v = p.concepts[c];
        const Vector x = m * v;
        const double n = x.norm();
        if (n - 1.0 <= 0.0) return;
        total += n - 1.0;
        if (!out) return;
        const Vector g = x / n;
        out->concept_at(c, k).noalias() += scale * (m.transpose() * g);
        (first ? out->proj1_at(r, k) : out->proj2_at(r, k)).noalias() += scale * g * v.transpose();
    };
    for (const auto& e : term.concepts) {
        if (e.source) projected(p.proj1[e.relation], e.concept_id, true, e.relation);
        if (e.target) projected(p.proj2[e.relation], e.concept_id, false, e.relation);
    }
    std::set<RelationId> relations(term.relations.begin(), term.relations.end());
    for (RelationId r : relations) {
        if (r >= p.num_relations()) throw InputError("relation id out of range");
        const Vector& v = p.relations[r];
        const double n = v.norm();
        if (n - 2.0 <= 0.0) continue;
        total += n - 2.0;
        if (out) out->relation_at(r, k) += scale * (v / n);
    }
    return total;
}

double dispatch(const ModelParams& p, const LossTerm& term, double scale, GradientSlice* out) {
    return std::visit(
        [&](const auto& t) -> double {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, CsmTerm>) return csm_accumulate(p, t, scale, out);
            else if constexpr (std::is_same_v<T, HmTerm>) return hm_accumulate(p, t, scale, out);
            else return norm_accumulate(p, t, scale, out);
        },
        term);
}

} // namespace

GradientSlice& GradientSlice::operator+=(const GradientSlice& other) {
    merge(concepts, other.concepts);
    merge(relations, other.relations);
    merge(proj1, other.proj1);
    merge(proj2, other.proj2);
    return *this;
}

double dissimilarity(const ModelParams& p, const Triple& t, NormOrder norm) {
    check_ids(p, t);
    return norm_of(residual(p, t, t.relation), norm);
}

double dissimilarity_with_translation(const ModelParams& p, const Triple& t, RelationId translation,
                                      NormOrder norm) {
    check_ids(p, t);
    if (translation >= p.num_relations()) throw InputError("relation id out of range");
    return norm_of(residual(p, t, translation), norm);
}

double cosine_distance(const Vector& u, const Vector& v) {
    if (u.size() != v.size()) throw ContractViolation("cosine_distance: length mismatch");
    const double nu = u.norm(), nv = v.norm();
    if (nu == 0.0 || nv == 0.0) return 1.0;
    return 1.0 - u.dot(v) / (nu * nv);
}

double csm_term(const ModelParams& p, const Triple& t, RelationId negative, double gamma1, NormOrder norm) {
    return csm_accumulate(p, CsmTerm{t, negative, gamma1, norm}, 1.0, nullptr);
}

double hm_refinement_term(const ModelParams& p, ConceptId s, RelationId r, ConceptId t, ConceptId t_neg,
                          double gamma2) {
    return hm_accumulate(p, HmTerm{{s, r, t}, t_neg, HierarchySide::refinement, gamma2}, 1.0, nullptr);
}

double hm_coercion_term(const ModelParams& p, ConceptId t, RelationId r, ConceptId s, ConceptId s_neg,
                        double gamma2) {
    return hm_accumulate(p, HmTerm{{s, r, t}, s_neg, HierarchySide::coercion, gamma2}, 1.0, nullptr);
}

double norm_penalty(const ModelParams& p, std::span<const NormEntry> concepts,
                    std::span<const RelationId> relations) {
    NormTerm term{{concepts.begin(), concepts.end()}, {relations.begin(), relations.end()}};
    return norm_accumulate(p, term, 1.0, nullptr);
}

double loss(const ModelParams& p, const LossTerm& term) { return dispatch(p, term, 1.0, nullptr); }

double accumulate_gradient(const ModelParams& p, const LossTerm& term, double scale, GradientSlice& out) {
    return dispatch(p, term, scale, &out);
}

GradientSlice gradients(const ModelParams& p, const LossTerm& term) {
    GradientSlice out;
    dispatch(p, term, 1.0, &out);
    return out;
}

void check_negative(const OntologyGraph& g, const CsmTerm& term) {
    const Triple& t = term.positive;
    if (term.negative == t.relation)
        throw ContractViolation("csm negative equals the positive relation");
    if (g.contains({t.source, term.negative, t.target}))
        throw ContractViolation("csm negative relation '" + g.relation(term.negative).name +
                                "' holds between the pair");
}

void check_negative(const OntologyGraph& g, const HmTerm& term) {
    const Triple& t = term.positive;
    const auto& meta = g.relation(t.relation);
    if (term.side == HierarchySide::refinement) {
        if (!meta.refinement)
            throw ContractViolation("relation '" + meta.name + "' is not a refinement relation");
        if (g.in_refine(t.source, t.relation, term.negative))
            throw ContractViolation("negative target lies inside sigma(s, r)");
    } else {
        if (!meta.coercion) throw ContractViolation("relation '" + meta.name + "' is not a coercion relation");
        if (g.in_refine(t.target, t.relation, term.negative))
            throw ContractViolation("negative source lies inside sigma(t, r)");
    }
}

} // namespace on2vec

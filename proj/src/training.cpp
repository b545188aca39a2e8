#include "on2vec/training.hpp"

#include "on2vec/errors.hpp"
#include "on2vec/evaluation.hpp"
#include "on2vec/log.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <map>
#include <set>

namespace on2vec {

namespace {

template <class Int>
Int uniform_index(Int n, std::mt19937_64& rng) {
    return std::uniform_int_distribution<Int>(0, n - 1)(rng);
}

// Relations that do not hold between s and t, ascending.
std::vector<RelationId> free_relations(const OntologyGraph& g, ConceptId s, ConceptId t) {
    const auto held = g.relations_between(s, t);
    std::vector<RelationId> out;
    for (RelationId r = 0; r < g.num_relations(); ++r)
        if (!std::binary_search(held.begin(), held.end(), r)) out.push_back(r);
    return out;
}

} // namespace

std::vector<CsmSample> sample_csm_batch(const OntologyGraph& g, int b, std::mt19937_64& rng) {
    if (g.num_relations() < 2) throw InputError("negative relation sampling needs at least two relations");
    if (g.num_triples() == 0) throw InputError("no training triples");
    std::vector<CsmSample> batch;
    batch.reserve(static_cast<std::size_t>(b));
    const std::size_t n = g.num_triples();
    std::size_t misses = 0;
    while (batch.size() < static_cast<std::size_t>(b)) {
        const Triple& t = g.triples()[uniform_index(n, rng)];
        const auto candidates = free_relations(g, t.source, t.target);
        if (candidates.empty()) {
            // Every relation holds for this pair; after many misses make sure
            // some usable triple exists at all.
            if (++misses % 1000 == 0) {
                bool any = false;
                for (const auto& u : g.triples())
                    if (g.relations_between(u.source, u.target).size() < g.num_relations()) {
                        any = true;
                        break;
                    }
                if (!any) throw InputError("every training pair is related by all relations; no negative exists");
            }
            continue;
        }
        batch.push_back({t, candidates[uniform_index(candidates.size(), rng)]});
    }
    return batch;
}

std::vector<HmSample> sample_hm_batch(const OntologyGraph& g, int b, std::mt19937_64& rng, int retry_budget) {
    const auto hier = g.populated_hierarchical_relations();
    std::vector<HmSample> batch;
    if (hier.empty() || b <= 0) return batch;

    const std::size_t want = static_cast<std::size_t>(b);
    const std::size_t nc = g.num_concepts();
    std::vector<Triple> expanded;
    expanded.reserve(want);
    while (expanded.size() < want) {
        const ConceptId c = uniform_index(static_cast<ConceptId>(nc), rng);
        const RelationId r = hier[uniform_index(hier.size(), rng)];
        const bool refinement = g.relation(r).refinement;
        for (ConceptId finer : g.refine(c, r)) {
            if (expanded.size() >= want) break;
            expanded.push_back(refinement ? Triple{c, r, finer} : Triple{finer, r, c});
        }
    }

    std::size_t skipped = 0;
    for (const auto& t : expanded) {
        const bool refinement = g.relation(t.relation).refinement;
        const ConceptId coarse = refinement ? t.source : t.target;
        std::optional<ConceptId> negative;
        for (int attempt = 0; attempt < retry_budget; ++attempt) {
            const ConceptId cand = uniform_index(static_cast<ConceptId>(nc), rng);
            if (!g.in_refine(coarse, t.relation, cand)) {
                negative = cand;
                break;
            }
        }
        if (!negative) {
            ++skipped;
            continue;
        }
        batch.push_back({t, *negative, refinement ? HierarchySide::refinement : HierarchySide::coercion});
    }
    if (skipped) warn("hm batch: dropped " + std::to_string(skipped) + " entries after exhausting negative retries");
    return batch;
}

NormTerm constraint_batch(std::span<const CsmSample> csm, std::span<const HmSample> hm) {
    std::map<std::pair<ConceptId, RelationId>, NormEntry> entries;
    std::set<RelationId> relations;
    auto add = [&](ConceptId c, RelationId r, Slot slot) {
        auto& e = entries[{c, r}];
        e.concept_id = c;
        e.relation = r;
        (slot == Slot::source ? e.source : e.target) = true;
    };
    for (const auto& s : csm) {
        add(s.positive.source, s.positive.relation, Slot::source);
        add(s.positive.target, s.positive.relation, Slot::target);
        relations.insert(s.positive.relation);
        relations.insert(s.negative);
    }
    for (const auto& s : hm) {
        add(s.positive.source, s.positive.relation, Slot::source);
        add(s.positive.target, s.positive.relation, Slot::target);
        add(s.negative, s.positive.relation, s.side == HierarchySide::refinement ? Slot::target : Slot::source);
        relations.insert(s.positive.relation);
    }
    NormTerm term;
    term.concepts.reserve(entries.size());
    for (const auto& [key, e] : entries) term.concepts.push_back(e);
    term.relations.assign(relations.begin(), relations.end());
    return term;
}

void apply_gradient(ModelParams& p, const GradientSlice& g, double step) {
    for (const auto& [c, v] : g.concepts) p.concepts[c] -= step * v;
    for (const auto& [r, v] : g.relations) p.relations[r] -= step * v;
    switch (p.variant) {
    case Variant::transe:
        break;
    case Variant::on2vec:
        for (const auto& [r, m] : g.proj1) p.proj1[r] -= step * m;
        for (const auto& [r, m] : g.proj2) p.proj2[r] -= step * m;
        break;
    case Variant::transr: {
        std::set<RelationId> touched;
        for (const auto& [r, m] : g.proj1) touched.insert(r);
        for (const auto& [r, m] : g.proj2) touched.insert(r);
        for (RelationId r : touched) {
            Matrix combined = Matrix::Zero(p.k, p.k);
            if (auto it = g.proj1.find(r); it != g.proj1.end()) combined += it->second;
            if (auto it = g.proj2.find(r); it != g.proj2.end()) combined += it->second;
            p.proj1[r] -= step * combined;
            p.proj2[r] = p.proj1[r];
        }
        break;
    }
    }
}

StepLosses sgd_step(ModelParams& p, std::span<const CsmSample> csm, std::span<const HmSample> hm,
                    const TrainConfig& cfg) {
    StepLosses losses;
    if (cfg.alpha1 == 0.0) hm = {};

    GradientSlice g_csm;
    for (const auto& s : csm)
        losses.csm += accumulate_gradient(p, CsmTerm{s.positive, s.negative, cfg.gamma1, cfg.norm}, 1.0, g_csm);
    if (!g_csm.all_finite()) throw NumericalError("non-finite gradient in the CSM batch term");
    apply_gradient(p, g_csm, cfg.lambda);

    if (!hm.empty()) {
        GradientSlice g_hm;
        for (const auto& s : hm)
            losses.hm += accumulate_gradient(p, HmTerm{s.positive, s.negative, s.side, cfg.gamma2}, 1.0, g_hm);
        if (!g_hm.all_finite()) throw NumericalError("non-finite gradient in the HM batch term");
        apply_gradient(p, g_hm, cfg.lambda * cfg.alpha1);
    }

    GradientSlice g_norm;
    losses.norm = accumulate_gradient(p, constraint_batch(csm, hm), 1.0, g_norm);
    if (!g_norm.all_finite()) throw NumericalError("non-finite gradient in the soft-constraint term");
    apply_gradient(p, g_norm, cfg.lambda * cfg.alpha2);
    return losses;
}

std::string to_json_line(const EpochLog& e) {
    nlohmann::json j;
    j["epoch"] = e.epoch;
    j["meanCsmLoss"] = e.mean_csm_loss;
    j["meanHmLoss"] = e.mean_hm_loss;
    j["meanNormLoss"] = e.mean_norm_loss;
    j["validAccuracy"] = e.valid_accuracy ? nlohmann::json(*e.valid_accuracy) : nlohmann::json(nullptr);
    j["elapsedSeconds"] = e.elapsed_seconds;
    return j.dump();
}

TrainResult train(const OntologyGraph& g, std::span<const Triple> valid, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
    cfg.validate();
    if (g.num_triples() == 0) throw InputError("no training triples");
    for (const auto& t : valid)
        if (t.source >= g.num_concepts() || t.target >= g.num_concepts() || t.relation >= g.num_relations())
            throw InputError("validation triple outside the training registry");

    const auto start = std::chrono::steady_clock::now();
    std::seed_seq sampling_seed{cfg.seed, std::uint64_t{0x0d2f}};
    TrainState state{init_params(g, cfg), 0, 0.0, 0, std::mt19937_64(sampling_seed)};
    auto accuracy = [&](const ModelParams& p) {
        return evaluate_prediction(p, g, valid, cfg.norm).overall.accuracy();
    };

    TrainResult result;
    result.params = state.params;
    if (!valid.empty()) {
        result.initial_valid_accuracy = accuracy(state.params);
        state.best_valid_accuracy = result.initial_valid_accuracy;
        result.best_valid_accuracy = state.best_valid_accuracy;
    }

    const int batch = cfg.batch_size;
    const std::size_t steps = (g.num_triples() + batch - 1) / batch;
    const bool use_hm = cfg.alpha1 != 0.0;
    for (state.epoch = 1; state.epoch <= cfg.max_epochs; ++state.epoch) {
        StepLosses totals;
        std::size_t csm_terms = 0, hm_terms = 0, norm_steps = 0;
        for (std::size_t step = 0; step < steps; ++step) {
            const auto csm = sample_csm_batch(g, batch, state.rng);
            const auto hm = use_hm ? sample_hm_batch(g, batch, state.rng) : std::vector<HmSample>{};
            const auto l = sgd_step(state.params, csm, hm, cfg);
            totals.csm += l.csm;
            totals.hm += l.hm;
            totals.norm += l.norm;
            csm_terms += csm.size();
            hm_terms += hm.size();
            ++norm_steps;
        }

        EpochLog entry;
        entry.epoch = state.epoch;
        entry.mean_csm_loss = csm_terms ? totals.csm / csm_terms : 0.0;
        entry.mean_hm_loss = hm_terms ? totals.hm / hm_terms : 0.0;
        entry.mean_norm_loss = norm_steps ? totals.norm / norm_steps : 0.0;
        if (!valid.empty()) entry.valid_accuracy = accuracy(state.params);
        entry.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        result.log.push_back(entry);
        result.epochs_run = state.epoch;
        if (on_epoch) on_epoch(entry);

        if (valid.empty()) {
            result.params = state.params;
            continue;
        }
        if (*entry.valid_accuracy > state.best_valid_accuracy) {
            state.best_valid_accuracy = *entry.valid_accuracy;
            state.epochs_since_improvement = 0;
            result.params = state.params;
            result.best_epoch = state.epoch;
        } else {
            ++state.epochs_since_improvement;
        }
        if (state.epochs_since_improvement > 0 && state.epochs_since_improvement >= cfg.patience) break;
    }
    result.best_valid_accuracy = state.best_valid_accuracy;
    return result;
}

} // namespace on2vec

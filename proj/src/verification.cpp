#include "on2vec/verification.hpp"

#include "on2vec/energy.hpp"
#include "on2vec/errors.hpp"
#include "on2vec/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_set>

namespace on2vec {

std::vector<VerificationCase> positive_cases(const OntologyGraph& g) {
    std::vector<VerificationCase> out;
    out.reserve(g.num_triples());
    for (const auto& t : g.triples()) out.push_back({t, Label::positive, 0.0, Corruption::none});
    return out;
}

std::vector<VerificationCase> generate_negatives(const OntologyGraph& g, std::uint64_t seed, int retry_budget) {
    if (g.num_relations() < 2) throw InputError("negative generation needs at least two relations");
    const std::size_t n = g.num_triples();
    std::mt19937_64 rng(seed);
    std::unordered_set<Triple, TripleHash> made;
    std::vector<VerificationCase> out;
    out.reserve(n + n / 2);

    auto pick = [&rng](std::size_t size) { return std::uniform_int_distribution<std::size_t>(0, size - 1)(rng); };

    for (std::size_t i = 0; i < n; ++i) {
        bool done = false;
        for (int attempt = 0; attempt < retry_budget && !done; ++attempt) {
            const Triple& base = g.triples()[attempt == 0 ? i : pick(n)];
            std::vector<RelationId> free;
            for (RelationId r = 0; r < g.num_relations(); ++r) {
                const Triple cand{base.source, r, base.target};
                if (!g.contains(cand) && !made.count(cand)) free.push_back(r);
            }
            if (free.empty()) continue;
            const Triple neg{base.source, free[pick(free.size())], base.target};
            made.insert(neg);
            out.push_back({neg, Label::negative, 0.0, Corruption::relation_swap});
            done = true;
        }
        if (!done) throw InputError("relation-swap negatives: retry budget exhausted");
    }

    const std::size_t nc = g.num_concepts();
    const std::size_t unrelated = n / 2;
    if (unrelated > 0 && nc < 2) throw InputError("unrelated-pair negatives need at least two concepts");
    for (std::size_t i = 0; i < unrelated; ++i) {
        bool done = false;
        for (int attempt = 0; attempt < retry_budget && !done; ++attempt) {
            const auto s = static_cast<ConceptId>(pick(nc));
            const auto t = static_cast<ConceptId>(pick(nc));
            if (s == t) continue;
            if (!g.relations_between(s, t).empty() || !g.relations_between(t, s).empty()) continue;
            const Triple neg{s, static_cast<RelationId>(pick(g.num_relations())), t};
            if (made.count(neg)) continue;
            made.insert(neg);
            out.push_back({neg, Label::negative, 0.0, Corruption::unrelated_pair});
            done = true;
        }
        if (!done) throw InputError("unrelated-pair negatives: retry budget exhausted");
    }
    return out;
}

double threshold_accuracy(std::span<const VerificationCase> cases, double tau) {
    if (cases.empty()) return 0.0;
    std::size_t correct = 0;
    for (const auto& c : cases)
        if ((c.score < tau) == (c.label == Label::positive)) ++correct;
    return static_cast<double>(correct) / cases.size();
}

ThresholdFit fit_threshold(std::span<const VerificationCase> cases) {
    if (cases.empty()) throw InputError("no cases to fit a threshold on");
    std::vector<std::pair<double, bool>> sorted;
    sorted.reserve(cases.size());
    for (const auto& c : cases) {
        if (!std::isfinite(c.score)) throw InputError("non-finite verification score");
        sorted.emplace_back(c.score, c.label == Label::positive);
    }
    std::sort(sorted.begin(), sorted.end());

    const double n = static_cast<double>(sorted.size());
    // tau below every score: everything is called negative.
    long correct = std::count_if(sorted.begin(), sorted.end(), [](const auto& x) { return !x.second; });
    ThresholdFit best{sorted.front().first - 1.0, correct / n};
    for (std::size_t i = 0; i < sorted.size();) {
        const double v = sorted[i].first;
        while (i < sorted.size() && sorted[i].first == v) {
            correct += sorted[i].second ? 1 : -1;
            ++i;
        }
        const double tau = i < sorted.size() ? 0.5 * (v + sorted[i].first) : sorted.back().first + 1.0;
        if (correct / n > best.accuracy) best = {tau, correct / n};
    }
    return best;
}

namespace {

bool both_labels(std::span<const VerificationCase> cases, const std::vector<char>& member, bool inside) {
    bool pos = false, neg = false;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        if (static_cast<bool>(member[i]) != inside) continue;
        (cases[i].label == Label::positive ? pos : neg) = true;
    }
    return pos && neg;
}

} // namespace

std::vector<std::vector<std::size_t>> assign_folds(std::span<const VerificationCase> cases, int folds,
                                                   std::uint64_t seed) {
    if (folds < 2) throw InputError("cross-validation needs at least two folds");
    if (cases.size() < static_cast<std::size_t>(folds)) throw InputError("fewer cases than folds");
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> order(cases.size());
    for (int round = 0; round < 2; ++round) {
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(folds));
        for (std::size_t pos = 0; pos < order.size(); ++pos) out[pos % folds].push_back(order[pos]);
        bool ok = true;
        for (const auto& fold : out) {
            std::vector<char> member(cases.size(), 0);
            for (auto i : fold) member[i] = 1;
            if (!both_labels(cases, member, true) || !both_labels(cases, member, false)) {
                ok = false;
                break;
            }
        }
        if (ok) {
            for (auto& fold : out) std::sort(fold.begin(), fold.end());
            return out;
        }
    }
    throw InputError("could not form folds that each hold both labels");
}

CrossValidation cross_validate(const OntologyGraph& g, std::span<const VerificationCase> cases, int folds,
                               std::uint64_t seed, const FoldScorer& scorer) {
    CrossValidation cv;
    cv.folds = assign_folds(cases, folds, seed);
    std::vector<Triple> all;
    all.reserve(cases.size());
    for (const auto& c : cases) all.push_back(c.triple);

    double sum_prop = 0.0, sum_hier = 0.0;
    std::size_t n_prop = 0, n_hier = 0;
    for (const auto& fold : cv.folds) {
        std::vector<char> held(cases.size(), 0);
        for (auto i : fold) held[i] = 1;
        std::vector<Triple> train_pos;
        for (std::size_t i = 0; i < cases.size(); ++i)
            if (!held[i] && cases[i].label == Label::positive) train_pos.push_back(cases[i].triple);

        const auto scores = scorer(train_pos, all);
        if (scores.size() != cases.size()) throw ContractViolation("scorer returned the wrong number of scores");
        std::vector<VerificationCase> train_cases, test_cases;
        for (std::size_t i = 0; i < cases.size(); ++i) {
            VerificationCase c = cases[i];
            c.score = scores[i];
            (held[i] ? test_cases : train_cases).push_back(c);
        }

        FoldResult r;
        const auto fit = fit_threshold(train_cases);
        r.tau = fit.tau;
        r.train_accuracy = fit.accuracy;
        for (const auto& c : test_cases) {
            const bool hit = (c.score < fit.tau) == (c.label == Label::positive);
            const auto& meta = g.relation(c.triple.relation);
            auto tally = [hit](BucketCount& b) {
                ++b.total;
                if (hit) ++b.correct;
            };
            tally(r.overall);
            if (meta.has_property()) tally(r.prop);
            if (meta.hierarchical()) tally(r.hier);
        }
        if (r.prop.total) {
            sum_prop += r.prop.accuracy();
            ++n_prop;
        }
        if (r.hier.total) {
            sum_hier += r.hier.accuracy();
            ++n_hier;
        }
        cv.results.push_back(r);
    }

    const double k = static_cast<double>(cv.results.size());
    for (const auto& r : cv.results) cv.mean_accuracy += r.overall.accuracy();
    cv.mean_accuracy /= k;
    double var = 0.0;
    for (const auto& r : cv.results) var += std::pow(r.overall.accuracy() - cv.mean_accuracy, 2);
    cv.stddev_accuracy = std::sqrt(var / k);
    cv.mean_prop_accuracy = n_prop ? sum_prop / n_prop : 0.0;
    cv.mean_hier_accuracy = n_hier ? sum_hier / n_hier : 0.0;
    return cv;
}

CrossValidation cross_validate_verification(const OntologyGraph& g, const TrainConfig& cfg, int folds,
                                            std::uint64_t seed) {
    auto cases = positive_cases(g);
    auto negatives = generate_negatives(g, seed);
    cases.insert(cases.end(), negatives.begin(), negatives.end());

    FoldScorer scorer = [&](std::span<const Triple> train_pos, std::span<const Triple> to_score) {
        const auto fold_graph = g.with_triples(train_pos);
        const auto trained = train(fold_graph, {}, cfg);
        std::vector<double> scores;
        scores.reserve(to_score.size());
        for (const auto& t : to_score) scores.push_back(dissimilarity(trained.params, t, cfg.norm));
        return scores;
    };
    return cross_validate(g, cases, folds, seed, scorer);
}

nlohmann::json to_json(const CrossValidation& cv) {
    nlohmann::json folds = nlohmann::json::array();
    for (const auto& r : cv.results)
        folds.push_back({{"tau", r.tau},
                         {"trainAccuracy", r.train_accuracy},
                         {"overall", to_json(r.overall)},
                         {"prop", to_json(r.prop)},
                         {"hier", to_json(r.hier)}});
    return {{"meanAccuracy", cv.mean_accuracy},
            {"stddevAccuracy", cv.stddev_accuracy},
            {"meanPropAccuracy", cv.mean_prop_accuracy},
            {"meanHierAccuracy", cv.mean_hier_accuracy},
            {"folds", folds}};
}

} // namespace on2vec

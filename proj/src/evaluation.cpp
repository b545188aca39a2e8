#include "on2vec/evaluation.hpp"

#include "on2vec/energy.hpp"
#include "on2vec/errors.hpp"
#include "on2vec/text.hpp"

#include <algorithm>
#include <thread>

namespace on2vec {

namespace {

// Runs fn(i) for i in [0, n) on up to `threads` workers, contiguous chunks.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn fn) {
    const std::size_t workers = std::clamp<std::size_t>(threads < 1 ? 1 : static_cast<std::size_t>(threads), 1,
                                                        std::max<std::size_t>(n, 1));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
}

} // namespace

std::vector<double> relation_scores(const ModelParams& p, ConceptId s, ConceptId t, NormOrder norm) {
    std::vector<double> out(p.num_relations());
    for (RelationId r = 0; r < p.num_relations(); ++r) out[r] = dissimilarity(p, {s, r, t}, norm);
    return out;
}

Prediction predict_relation(const ModelParams& p, ConceptId s, ConceptId t, NormOrder norm) {
    if (p.num_relations() == 0) throw InputError("no relations to predict from");
    Prediction best{0, dissimilarity(p, {s, 0, t}, norm)};
    for (RelationId r = 1; r < p.num_relations(); ++r) {
        const double score = dissimilarity(p, {s, r, t}, norm);
        if (score < best.score) best = {r, score};
    }
    return best;
}

EvalReport evaluate_prediction(const ModelParams& p, const OntologyGraph& g, std::span<const Triple> test,
                               NormOrder norm, int threads) {
    if (test.empty()) throw InputError("empty test set");
    if (g.num_relations() != p.num_relations())
        throw InputError("relation registry does not match the parameters");
    std::vector<RelationId> predicted(test.size());
    parallel_for(test.size(), threads, [&](std::size_t i) {
        predicted[i] = predict_relation(p, test[i].source, test[i].target, norm).relation;
    });

    EvalReport report;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const bool hit = predicted[i] == test[i].relation;
        const auto& meta = g.relation(test[i].relation);
        auto tally = [hit](BucketCount& b) {
            ++b.total;
            if (hit) ++b.correct;
        };
        tally(report.overall);
        if (meta.has_property()) tally(report.prop);
        if (meta.hierarchical()) tally(report.hier);
    }
    return report;
}

PrCurve pr_curve_from_scores(std::span<const std::vector<double>> scores, std::span<const RelationId> truth) {
    if (scores.size() != truth.size()) throw ContractViolation("pr curve: score rows and truths differ in length");
    if (scores.empty()) throw InputError("empty test set");

    struct Candidate {
        double score;
        bool correct;
    };
    std::vector<Candidate> pool;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const auto& row = scores[i];
        if (truth[i] >= row.size()) throw ContractViolation("pr curve: true relation outside the score row");
        const double bar = row[truth[i]];
        for (std::size_t r = 0; r < row.size(); ++r)
            if (row[r] <= bar) pool.push_back({row[r], r == truth[i]});
    }
    std::sort(pool.begin(), pool.end(), [](const Candidate& a, const Candidate& b) { return a.score < b.score; });

    PrCurve curve;
    const double cases = static_cast<double>(scores.size());
    std::size_t answered = 0, correct = 0;
    for (std::size_t i = 0; i < pool.size();) {
        const double threshold = pool[i].score;
        while (i < pool.size() && pool[i].score == threshold) {
            ++answered;
            if (pool[i].correct) ++correct;
            ++i;
        }
        curve.points.push_back({threshold, correct / cases, static_cast<double>(correct) / answered});
    }

    double prev_recall = 0.0, prev_precision = curve.points.front().precision;
    for (const auto& pt : curve.points) {
        curve.auc += 0.5 * (pt.precision + prev_precision) * (pt.recall - prev_recall);
        prev_recall = pt.recall;
        prev_precision = pt.precision;
    }
    return curve;
}

PrCurve pr_curve(const ModelParams& p, std::span<const Triple> test, NormOrder norm, int threads) {
    if (test.empty()) throw InputError("empty test set");
    std::vector<std::vector<double>> rows(test.size());
    std::vector<RelationId> truth(test.size());
    parallel_for(test.size(), threads, [&](std::size_t i) {
        rows[i] = relation_scores(p, test[i].source, test[i].target, norm);
        truth[i] = test[i].relation;
    });
    return pr_curve_from_scores(rows, truth);
}

nlohmann::json to_json(const BucketCount& b) {
    nlohmann::json j{{"total", b.total}, {"correct", b.correct}};
    j["accuracy"] = b.total ? nlohmann::json(b.accuracy()) : nlohmann::json(nullptr);
    return j;
}

nlohmann::json to_json(const EvalReport& report) {
    nlohmann::json j;
    j["overallAccuracy"] = report.overall.accuracy();
    j["propAccuracy"] = report.prop.total ? nlohmann::json(report.prop.accuracy()) : nlohmann::json(nullptr);
    j["hierAccuracy"] = report.hier.total ? nlohmann::json(report.hier.accuracy()) : nlohmann::json(nullptr);
    j["counts"] = {{"overall", to_json(report.overall)}, {"prop", to_json(report.prop)}, {"hier", to_json(report.hier)}};
    if (report.pr) {
        nlohmann::json pts = nlohmann::json::array();
        for (const auto& pt : report.pr->points)
            pts.push_back({{"threshold", pt.threshold}, {"recall", pt.recall}, {"precision", pt.precision}});
        j["pr"] = {{"points", pts}, {"auc", report.pr->auc}};
    }
    return j;
}

std::string pr_csv(const PrCurve& curve) {
    std::string out = "threshold,recall,precision\n";
    for (const auto& pt : curve.points)
        out += format_double(pt.threshold) + "," + format_double(pt.recall) + "," + format_double(pt.precision) + "\n";
    return out;
}

} // namespace on2vec

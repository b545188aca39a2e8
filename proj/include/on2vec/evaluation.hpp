#pragma once

#include "on2vec/graph.hpp"
#include "on2vec/params.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace on2vec {

// Published On2Vec figures on the YG15k corpus. Reference only; desk-scale
// runs do not reproduce them.
namespace reference {
inline constexpr double yg15k_on2vec_hm_accuracy = 0.8875;
inline constexpr double yg15k_on2vec_hm_auc = 0.9138;
inline constexpr double yg15k_transe_auc = 0.0457;
} // namespace reference

struct Prediction {
    RelationId relation = 0;
    double score = 0.0;
};

// S_d of (s, r, t) for every relation r, indexed by relation id.
std::vector<double> relation_scores(const ModelParams& p, ConceptId s, ConceptId t, NormOrder norm);

// Lowest-S_d relation; ties go to the smallest id.
Prediction predict_relation(const ModelParams& p, ConceptId s, ConceptId t, NormOrder norm);

struct BucketCount {
    std::size_t total = 0;
    std::size_t correct = 0;
    double accuracy() const { return total ? static_cast<double>(correct) / total : 0.0; }
};

struct PrPoint {
    double threshold = 0.0;
    double recall = 0.0;
    double precision = 0.0;
};

struct PrCurve {
    std::vector<PrPoint> points;
    double auc = 0.0;
};

// overall: every case. prop: true relation transitive or symmetric.
// hier: true relation refinement or coercion. A case can count in both.
struct EvalReport {
    BucketCount overall;
    BucketCount prop;
    BucketCount hier;
    std::optional<PrCurve> pr;
};

// Relation-prediction accuracy on `test`; `g` supplies relation flags.
// Scoring is split over `threads` workers; counts are reduced in case order.
EvalReport evaluate_prediction(const ModelParams& p, const OntologyGraph& g, std::span<const Triple> test,
                               NormOrder norm, int threads = 1);

// Builds the curve from per-case score rows (one score per relation) and the
// true relation of each case. For every case the candidates are the
// relations scoring no higher than the true one; the threshold sweeps the
// distinct candidate scores upward. AUC is the trapezoid rule over recall,
// starting from recall 0 at the first point's precision.
PrCurve pr_curve_from_scores(std::span<const std::vector<double>> scores, std::span<const RelationId> truth);

PrCurve pr_curve(const ModelParams& p, std::span<const Triple> test, NormOrder norm, int threads = 1);

nlohmann::json to_json(const BucketCount& b);
nlohmann::json to_json(const EvalReport& report);

// `threshold,recall,precision` with a header row.
std::string pr_csv(const PrCurve& curve);

} // namespace on2vec

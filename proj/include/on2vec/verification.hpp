#pragma once

#include "on2vec/evaluation.hpp"
#include "on2vec/graph.hpp"
#include "on2vec/params.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace on2vec {

enum class Label { positive, negative };

// How a negative case was made: relation swapped on a positive pair, or a
// random relation put between two unrelated concepts.
enum class Corruption { none, relation_swap, unrelated_pair };

struct VerificationCase {
    Triple triple;
    Label label = Label::positive;
    double score = 0.0;
    Corruption origin = Corruption::none;
};

// One relation-swap negative per positive and one unrelated-pair negative per
// two positives (rounded down). No negative is a fact of g and none repeats.
// Throws InputError when the retry budget runs out.
std::vector<VerificationCase> generate_negatives(const OntologyGraph& g, std::uint64_t seed,
                                                 int retry_budget = 1000);

// All triples of g as positive cases.
std::vector<VerificationCase> positive_cases(const OntologyGraph& g);

struct ThresholdFit {
    double tau = 0.0;
    double accuracy = 0.0;
};

// Picks tau maximising accuracy of "score < tau means positive" over the
// candidates {min - 1, midpoints of adjacent distinct scores, max + 1};
// ties go to the smallest tau.
ThresholdFit fit_threshold(std::span<const VerificationCase> cases);

double threshold_accuracy(std::span<const VerificationCase> cases, double tau);

// Case indices per fold after a seeded shuffle (position modulo folds). Every
// fold and its complement must hold both labels; one reshuffle is tried
// before giving up with InputError.
std::vector<std::vector<std::size_t>> assign_folds(std::span<const VerificationCase> cases, int folds,
                                                   std::uint64_t seed);

struct FoldResult {
    double tau = 0.0;
    double train_accuracy = 0.0;
    BucketCount overall;
    BucketCount prop;
    BucketCount hier;
};

struct CrossValidation {
    std::vector<std::vector<std::size_t>> folds;
    std::vector<FoldResult> results;
    double mean_accuracy = 0.0;
    double stddev_accuracy = 0.0;
    double mean_prop_accuracy = 0.0;
    double mean_hier_accuracy = 0.0;
};

// Scores `to_score` with a model fitted on `training_positives`.
using FoldScorer =
    std::function<std::vector<double>(std::span<const Triple> training_positives, std::span<const Triple> to_score)>;

// Per fold: score every case with a model fitted on the other folds'
// positives, fit tau on the other folds' cases, measure accuracy on the fold.
// `g` supplies relation flags for bucketing.
CrossValidation cross_validate(const OntologyGraph& g, std::span<const VerificationCase> cases, int folds,
                               std::uint64_t seed, const FoldScorer& scorer);

// Full protocol: negatives from g, embeddings retrained per fold on the
// training-fold positives for cfg.max_epochs epochs, scored with S_d.
CrossValidation cross_validate_verification(const OntologyGraph& g, const TrainConfig& cfg, int folds,
                                            std::uint64_t seed);

nlohmann::json to_json(const CrossValidation& cv);

} // namespace on2vec

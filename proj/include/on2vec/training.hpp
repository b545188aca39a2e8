#pragma once

#include "on2vec/energy.hpp"
#include "on2vec/graph.hpp"
#include "on2vec/params.hpp"

#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace on2vec {

struct CsmSample {
    Triple positive;
    RelationId negative = 0;
};

struct HmSample {
    Triple positive;
    ConceptId negative = 0;
    HierarchySide side = HierarchySide::refinement;
};

// b training triples drawn uniformly with replacement, each paired with a
// relation drawn uniformly from those that do not hold between its pair.
// Pairs related by every relation are redrawn.
std::vector<CsmSample> sample_csm_batch(const OntologyGraph& g, int b, std::mt19937_64& rng);

// Draws (concept, hierarchical relation) uniformly and appends the sigma
// expansion as triples until b entries exist (the last expansion is
// truncated). Each entry gets a negative concept outside sigma; entries whose
// retry budget runs out are dropped with a warning. Empty when the graph has
// no hierarchical facts.
std::vector<HmSample> sample_hm_batch(const OntologyGraph& g, int b, std::mt19937_64& rng,
                                      int retry_budget = 100);

// Soft-constraint batch for one step: each concept bound to the relation of
// the triple it was drawn from, flagged by the projection slots it used.
NormTerm constraint_batch(std::span<const CsmSample> csm, std::span<const HmSample> hm);

struct StepLosses {
    double csm = 0.0;
    double hm = 0.0;
    double norm = 0.0;
};

// Three sequential updates: CSM batch, then alpha1 * HM batch, then
// alpha2 * soft constraints over both batches. Each gradient is a plain sum
// over its batch, taken at the parameters left by the previous update. With
// alpha1 == 0 the HM batch is ignored entirely. Losses are those at the
// point each gradient was taken.
StepLosses sgd_step(ModelParams& p, std::span<const CsmSample> csm, std::span<const HmSample> hm,
                    const TrainConfig& cfg);

// theta -= step * g, honouring the variant's tying rules.
void apply_gradient(ModelParams& p, const GradientSlice& g, double step);

struct EpochLog {
    int epoch = 0;
    double mean_csm_loss = 0.0;
    double mean_hm_loss = 0.0;
    double mean_norm_loss = 0.0;
    std::optional<double> valid_accuracy;
    double elapsed_seconds = 0.0;
};

std::string to_json_line(const EpochLog& e);

struct TrainState {
    ModelParams params;
    int epoch = 0;
    double best_valid_accuracy = 0.0;
    int epochs_since_improvement = 0;
    std::mt19937_64 rng;
};

struct TrainResult {
    ModelParams params;           // best validation snapshot
    std::vector<EpochLog> log;    // one entry per trained epoch
    double initial_valid_accuracy = 0.0;
    double best_valid_accuracy = 0.0;
    int best_epoch = 0;
    int epochs_run = 0;
};

using EpochCallback = std::function<void(const EpochLog&)>;

// Epochs of ceil(|G| / b) steps. After each epoch the relation-prediction
// accuracy on `valid` is measured and the best snapshot kept; training stops
// after `patience` epochs without strict improvement or at max_epochs. With
// an empty `valid` every epoch runs and the last parameters are returned.
TrainResult train(const OntologyGraph& train_graph, std::span<const Triple> valid, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

} // namespace on2vec

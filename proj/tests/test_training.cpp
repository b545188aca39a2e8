#include "on2vec/energy.hpp"
#include "on2vec/errors.hpp"
#include "on2vec/synthetic.hpp"
#include "on2vec/training.hpp"

#include "generators.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

using namespace on2vec;

namespace {

RelationMeta plain(RelationId id, std::string name) { return {id, std::move(name), false, false, false, false}; }

ModelParams identity_params(std::size_t nc, std::size_t nr, int k) {
    ModelParams p;
    p.k = k;
    p.concepts.assign(nc, Vector::Zero(k));
    p.relations.assign(nr, Vector::Zero(k));
    p.proj1.assign(nr, Matrix::Identity(k, k));
    p.proj2.assign(nr, Matrix::Identity(k, k));
    return p;
}

// Three-concept chain with its closure, plus one unrelated fact so that a
// second relation exists for negative sampling.
OntologyGraph case1_graph() {
    return OntologyGraph::build(
        std::vector<RawTriple>{{"a", "before", "b", 1}, {"b", "before", "c", 2}, {"a", "before", "c", 3},
                               {"c", "near", "d", 4}},
        {{0, "before", true, false, false, false}, plain(1, "near")});
}

} // namespace

TEST_CASE("csm negative is forced when one relation is free") {
    const auto g = OntologyGraph::build(std::vector<RawTriple>{{"a", "r1", "b", 1}}, {plain(0, "r1"), plain(1, "r2")});
    std::mt19937_64 rng(1);
    for (const auto& s : sample_csm_batch(g, 50, rng)) CHECK(s.negative == 1);
}

TEST_CASE("csm batch is drawn with replacement") {
    std::vector<RawTriple> raw;
    for (int i = 0; i < 10; ++i) raw.push_back({gen::name(i), "r1", gen::name(i + 1), 0});
    const auto g = OntologyGraph::build(raw, {plain(0, "r1"), plain(1, "r2")});
    std::mt19937_64 rng(2);
    CHECK(sample_csm_batch(g, 64, rng).size() == 64);
}

TEST_CASE("csm sampling needs a free relation") {
    const auto single = OntologyGraph::build(std::vector<RawTriple>{{"a", "r1", "b", 1}}, {plain(0, "r1")});
    std::mt19937_64 rng(3);
    CHECK_THROWS_AS(sample_csm_batch(single, 4, rng), InputError);
    const auto full = OntologyGraph::build(std::vector<RawTriple>{{"a", "r1", "b", 1}, {"a", "r2", "b", 2}},
                                           {plain(0, "r1"), plain(1, "r2")});
    CHECK_THROWS_AS(sample_csm_batch(full, 4, rng), InputError);
}

TEST_CASE("csm negatives are uniform over the free relations") {
    // Pair (a, b) holds r0 only; pair (c, d) holds r1..r4, leaving r0 free.
    std::vector<RawTriple> raw{{"a", "r0", "b", 1}};
    std::vector<RelationMeta> meta{plain(0, "r0")};
    for (int r = 1; r <= 4; ++r) {
        raw.push_back({"c", "r" + std::to_string(r), "d", 0});
        meta.push_back(plain(r, "r" + std::to_string(r)));
    }
    const auto g = OntologyGraph::build(raw, meta);
    std::mt19937_64 rng(4);
    std::array<double, 5> counts{};
    std::size_t n = 0;
    while (n < 100000) {
        for (const auto& s : sample_csm_batch(g, 1000, rng)) {
            if (s.positive.relation != 0) {
                CHECK(s.negative == 0);
                continue;
            }
            REQUIRE(s.negative != 0);
            counts[s.negative] += 1;
            ++n;
        }
    }
    const double expect = n / 4.0, sigma = std::sqrt(n * 0.25 * 0.75);
    double chi2 = 0;
    for (int r = 1; r <= 4; ++r) {
        CHECK(std::abs(counts[r] - expect) <= 3 * sigma);
        chi2 += (counts[r] - expect) * (counts[r] - expect) / expect;
    }
    CHECK(chi2 < 16.27);  // 3 degrees of freedom, p = 0.001
}

TEST_CASE("hm batch expands sigma of the drawn concept") {
    const auto g = OntologyGraph::build(std::vector<RawTriple>{{"x", "isA", "p", 1}, {"y", "isA", "p", 2}},
                                        {{0, "isA", true, false, false, true}});
    const auto x = *g.find_concept("x"), y = *g.find_concept("y"), p = *g.find_concept("p");
    std::mt19937_64 rng(5);
    const auto batch = sample_hm_batch(g, 2, rng);
    REQUIRE(batch.size() == 2);
    CHECK(batch[0].positive == Triple{x, 0, p});
    CHECK(batch[1].positive == Triple{y, 0, p});
    for (const auto& s : batch) {
        CHECK(s.side == HierarchySide::coercion);
        CHECK(s.negative == p);  // the only concept outside sigma(p)
    }
}

TEST_CASE("hm batch is empty without hierarchical facts") {
    std::mt19937_64 rng(6);
    const auto g = OntologyGraph::build(std::vector<RawTriple>{{"a", "r", "b", 1}}, {plain(0, "r")});
    CHECK(sample_hm_batch(g, 10, rng).empty());
}

TEST_CASE("property: hm negatives never fall inside sigma") {
    std::mt19937_64 rng(7);
    const auto g = gen::random_graph(rng, 20, 120);
    std::size_t drawn = 0, violations = 0;
    while (drawn < 10000) {
        for (const auto& s : sample_hm_batch(g, 100, rng)) {
            const bool refinement = s.side == HierarchySide::refinement;
            const ConceptId coarse = refinement ? s.positive.source : s.positive.target;
            const ConceptId finer = refinement ? s.positive.target : s.positive.source;
            CHECK(g.in_refine(coarse, s.positive.relation, finer));
            const auto sigma = g.refine(coarse, s.positive.relation);
            if (std::find(sigma.begin(), sigma.end(), s.negative) != sigma.end()) ++violations;
            ++drawn;
        }
    }
    CHECK(violations == 0);
}

TEST_CASE("zero learning rate leaves parameters unchanged") {
    std::mt19937_64 rng(8);
    const auto g = gen::random_graph(rng, 10, 40);
    auto p = oracle::random_params(g.num_concepts(), g.num_relations(), 4, rng);
    const auto before = p;
    TrainConfig cfg;
    cfg.lambda = 0.0;
    sgd_step(p, sample_csm_batch(g, 20, rng), sample_hm_batch(g, 20, rng), cfg);
    CHECK(bit_identical(p, before));
}

TEST_CASE("inactive hinges and satisfied norms leave parameters unchanged") {
    auto p = identity_params(2, 2, 2);
    p.concepts[0] = Vector::Unit(2, 0) * 0.5;
    p.concepts[1] = Vector::Unit(2, 0) * 0.5;
    p.relations[1] = Vector::Unit(2, 0);
    const auto before = p;
    const std::vector<CsmSample> csm{{{0, 0, 1}, 1}};
    sgd_step(p, csm, {}, TrainConfig{});
    CHECK(bit_identical(p, before));
}

TEST_CASE("one active csm term moves r by the finite-difference gradient") {
    auto p = identity_params(2, 2, 3);
    p.concepts[0] << 0.1, 0.0, 0.0;
    p.concepts[1] << 0.0, 0.1, 0.0;
    p.relations[0] << 0.3, 0.2, 0.1;
    p.relations[1] << 0.25, 0.2, 0.15;
    TrainConfig cfg;
    cfg.lambda = 0.01;
    const Triple pos{0, 0, 1};
    const auto f = [&](const ModelParams& q) { return csm_term(q, pos, 1, cfg.gamma1, cfg.norm); };
    REQUIRE(f(p) > 0);

    auto q = p;
    const double h = 1e-6;
    Vector fd0(3), fd1(3);
    for (int i = 0; i < 3; ++i) {
        for (auto [r, out] : {std::pair{0, &fd0}, std::pair{1, &fd1}}) {
            const double keep = q.relations[r][i];
            q.relations[r][i] = keep + h;
            const double up = f(q);
            q.relations[r][i] = keep - h;
            const double down = f(q);
            q.relations[r][i] = keep;
            (*out)[i] = (up - down) / (2 * h);
        }
    }
    const Vector r0 = p.relations[0] - cfg.lambda * fd0, r1 = p.relations[1] - cfg.lambda * fd1;
    const std::vector<CsmSample> csm{{pos, 1}};
    sgd_step(p, csm, {}, cfg);
    CHECK((p.relations[0] - r0).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((p.relations[1] - r1).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("step updates are sequential") {
    std::mt19937_64 rng(9);
    const auto g = gen::random_graph(rng, 12, 60);
    const auto p0 = oracle::random_params(g.num_concepts(), g.num_relations(), 4, rng);
    const auto csm = sample_csm_batch(g, 30, rng);
    const auto hm = sample_hm_batch(g, 30, rng);
    TrainConfig cfg;
    cfg.lambda = 0.05;

    auto sequential = p0;
    GradientSlice a, b, c;
    for (const auto& s : csm) accumulate_gradient(sequential, CsmTerm{s.positive, s.negative, cfg.gamma1, cfg.norm}, 1.0, a);
    apply_gradient(sequential, a, cfg.lambda);
    for (const auto& s : hm) accumulate_gradient(sequential, HmTerm{s.positive, s.negative, s.side, cfg.gamma2}, 1.0, b);
    apply_gradient(sequential, b, cfg.lambda * cfg.alpha1);
    accumulate_gradient(sequential, constraint_batch(csm, hm), 1.0, c);
    apply_gradient(sequential, c, cfg.lambda * cfg.alpha2);

    // Same three gradients, all taken at the starting point.
    auto simultaneous = p0;
    GradientSlice a0, b0, c0;
    for (const auto& s : csm) accumulate_gradient(p0, CsmTerm{s.positive, s.negative, cfg.gamma1, cfg.norm}, 1.0, a0);
    for (const auto& s : hm) accumulate_gradient(p0, HmTerm{s.positive, s.negative, s.side, cfg.gamma2}, 1.0, b0);
    accumulate_gradient(p0, constraint_batch(csm, hm), 1.0, c0);
    apply_gradient(simultaneous, a0, cfg.lambda);
    apply_gradient(simultaneous, b0, cfg.lambda * cfg.alpha1);
    apply_gradient(simultaneous, c0, cfg.lambda * cfg.alpha2);

    auto stepped = p0;
    sgd_step(stepped, csm, hm, cfg);
    CHECK(bit_identical(stepped, sequential));
    CHECK_FALSE(bit_identical(stepped, simultaneous));
}

TEST_CASE("alpha1 of zero ignores the hm batch") {
    std::mt19937_64 rng(10);
    const auto g = gen::random_graph(rng, 12, 60);
    const auto p0 = oracle::random_params(g.num_concepts(), g.num_relations(), 4, rng);
    const auto csm = sample_csm_batch(g, 30, rng);
    const auto hm = sample_hm_batch(g, 30, rng);
    REQUIRE_FALSE(hm.empty());
    TrainConfig cfg;
    cfg.alpha1 = 0.0;
    auto with_hm = p0, without = p0;
    sgd_step(with_hm, csm, hm, cfg);
    sgd_step(without, csm, {}, cfg);
    CHECK(bit_identical(with_hm, without));
}

TEST_CASE("transr keeps projections tied and transe keeps identities") {
    std::mt19937_64 rng(11);
    const auto g = gen::random_graph(rng, 12, 60);
    for (auto v : {Variant::transr, Variant::transe}) {
        TrainConfig cfg;
        cfg.k = 5;
        cfg.variant = v;
        cfg.lambda = 0.05;
        auto p = init_params(g, cfg);
        const auto start = p;
        for (int i = 0; i < 5; ++i) sgd_step(p, sample_csm_batch(g, 20, rng), sample_hm_batch(g, 20, rng), cfg);
        for (std::size_t r = 0; r < p.num_relations(); ++r) {
            CHECK(p.proj1[r] == p.proj2[r]);
            if (v == Variant::transe) CHECK(p.proj1[r] == Matrix::Identity(5, 5));
        }
        if (v == Variant::transr) {
            bool moved = false;
            for (std::size_t r = 0; r < p.num_relations(); ++r) moved |= p.proj1[r] != start.proj1[r];
            CHECK(moved);
        }
    }
}

TEST_CASE("transr applies the summed slot gradients to the shared matrix") {
    ModelParams p = identity_params(1, 1, 2);
    p.variant = Variant::transr;
    GradientSlice g;
    g.proj1_at(0, 2) = Matrix::Constant(2, 2, 1.0);
    g.proj2_at(0, 2) = Matrix::Constant(2, 2, 2.0);
    apply_gradient(p, g, 0.1);
    const Matrix expect = Matrix::Identity(2, 2) - 0.1 * Matrix::Constant(2, 2, 3.0);
    CHECK((p.proj1[0] - expect).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(p.proj2[0] == p.proj1[0]);
}

TEST_CASE("one epoch with zero patience") {
    std::mt19937_64 rng(12);
    const auto g = gen::random_graph(rng, 10, 40);
    TrainConfig cfg;
    cfg.k = 4;
    cfg.patience = 0;
    cfg.max_epochs = 1;
    const std::vector<Triple> valid(g.triples().begin(), g.triples().begin() + 5);
    const auto res = train(g, valid, cfg);
    CHECK(res.epochs_run == 1);
    CHECK(res.log.size() == 1);
}

TEST_CASE("training is seed-deterministic") {
    std::mt19937_64 rng(13);
    const auto g = gen::random_graph(rng, 15, 80);
    TrainConfig cfg;
    cfg.k = 6;
    cfg.max_epochs = 5;
    const std::vector<Triple> valid(g.triples().begin(), g.triples().begin() + 10);
    const auto a = train(g, valid, cfg), b = train(g, valid, cfg);
    CHECK(bit_identical(a.params, b.params));
    CHECK(a.epochs_run == b.epochs_run);
    cfg.seed = 2;
    CHECK_FALSE(bit_identical(train(g, valid, cfg).params, a.params));
}

TEST_CASE("training improves validation accuracy on a synthetic ontology") {
    const auto synth = generate_synthetic_ontology({}, 1);
    const auto train_graph = synth.graph.with_triples(synth.split.train);
    TrainConfig cfg;
    cfg.max_epochs = 30;
    const auto res = train(train_graph, synth.split.valid, cfg);
    CHECK(res.best_valid_accuracy > res.initial_valid_accuracy);
    CHECK(res.best_epoch >= 1);
}

TEST_CASE("epoch log line") {
    EpochLog e;
    e.epoch = 3;
    e.valid_accuracy = 0.5;
    const auto line = to_json_line(e);
    CHECK(line.find("\"epoch\":3") != std::string::npos);
    CHECK(line.find("\"validAccuracy\":0.5") != std::string::npos);
    e.valid_accuracy.reset();
    CHECK(to_json_line(e).find("\"validAccuracy\":null") != std::string::npos);
}

TEST_CASE("case-one chain: projections fit what translations cannot") {
    const auto g = case1_graph();
    std::array<double, 3> on2vec_scores{}, transe_scores{};
    double transe_r = 0;
    for (auto v : {Variant::on2vec, Variant::transe}) {
        TrainConfig cfg;
        cfg.k = 10;
        cfg.variant = v;
        cfg.max_epochs = 2000;
        cfg.lambda = 0.01;
        cfg.gamma1 = 4.0;
        cfg.batch_size = 4;
        const auto res = train(g, {}, cfg);
        auto& out = v == Variant::on2vec ? on2vec_scores : transe_scores;
        for (int i = 0; i < 3; ++i) out[i] = dissimilarity(res.params, g.triples()[i], cfg.norm);
        if (v == Variant::transe) transe_r = res.params.relations[0].norm();
    }
    for (double s : on2vec_scores) CHECK(s <= 0.1);
    CHECK(*std::max_element(transe_scores.begin(), transe_scores.end()) >= transe_r / 3);
}

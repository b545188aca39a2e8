#include "on2vec/errors.hpp"
#include "on2vec/params.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace on2vec;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

TrainConfig with(int k, std::uint64_t seed, Variant v) {
    TrainConfig cfg;
    cfg.k = k;
    cfg.seed = seed;
    cfg.variant = v;
    return cfg;
}

} // namespace

TEST_CASE("projections start orthogonal") {
    const auto p = init_params(6, 5, with(4, 7, Variant::on2vec));
    const Matrix id = Matrix::Identity(4, 4);
    for (std::size_t r = 0; r < p.num_relations(); ++r) {
        CHECK(max_abs(oracle::naive_matmul(p.proj1[r].transpose(), p.proj1[r]) - id) <= 1e-6);
        CHECK(max_abs(oracle::naive_matmul(p.proj2[r].transpose(), p.proj2[r]) - id) <= 1e-6);
    }
    CHECK(max_abs(p.proj1[0] - p.proj2[0]) > 1e-3);
}

TEST_CASE("orthogonal factor has a nonnegative R diagonal") {
    std::mt19937_64 rng(3);
    for (int k : {1, 2, 5, 12}) {
        const Matrix q = random_orthogonal_matrix(k, rng);
        CHECK(max_abs(oracle::naive_matmul(q, q.transpose()) - Matrix::Identity(k, k)) <= 1e-9);
    }
}

TEST_CASE("vectors start on the unit sphere") {
    for (std::uint64_t seed : {1u, 2u, 99u}) {
        const auto p = init_params(30, 4, with(17, seed, Variant::on2vec));
        for (const auto& v : p.concepts) CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-9));
        for (const auto& v : p.relations) CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("variant projection shapes") {
    const auto e = init_params(5, 3, with(6, 1, Variant::transe));
    for (std::size_t r = 0; r < 3; ++r) {
        CHECK(e.proj1[r] == Matrix::Identity(6, 6));
        CHECK(e.proj2[r] == Matrix::Identity(6, 6));
    }
    const auto tr = init_params(5, 3, with(6, 1, Variant::transr));
    for (std::size_t r = 0; r < 3; ++r) CHECK(tr.proj1[r] == tr.proj2[r]);
}

TEST_CASE("projection examples") {
    ModelParams p;
    p.k = 2;
    p.concepts = {Vector::Zero(2)};
    p.relations = {Vector::Zero(2)};
    p.proj1 = {2.0 * Matrix::Identity(2, 2)};
    p.proj2 = {Matrix::Identity(2, 2)};
    CHECK(project(p, 0, Vector::Unit(2, 0), Slot::source) == Vector(Vector::Unit(2, 0) * 2.0));
    CHECK(project(p, 0, Vector::Unit(2, 1), Slot::target) == Vector(Vector::Unit(2, 1)));

    std::mt19937_64 rng(5);
    p.k = 3;
    p.proj1 = {oracle::gaussian_matrix(3, rng)};
    p.proj2 = {oracle::gaussian_matrix(3, rng)};
    const Vector v = oracle::gaussian_vector(3, rng);
    const Vector got = project(p, 0, v, Slot::target);
    for (int i = 0; i < 3; ++i) {
        double dot = 0;
        for (int j = 0; j < 3; ++j) dot += p.proj2[0](i, j) * v[j];
        CHECK(std::abs(got[i] - dot) <= 1e-12);
    }
}

TEST_CASE("trainable counts match the closed forms") {
    std::mt19937_64 rng(21);
    std::uniform_int_distribution<int> nc(1, 500), nr(1, 40), kk(1, 64);
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t c = nc(rng), r = nr(rng);
        const int k = kk(rng);
        const std::size_t base = c * k + r * k;
        CHECK(trainable_parameter_count(Variant::transe, c, r, k) == base);
        CHECK(trainable_parameter_count(Variant::transr, c, r, k) == base + r * k * k);
        CHECK(trainable_parameter_count(Variant::on2vec, c, r, k) == base + 2 * r * k * k);
        CHECK(init_params(c, r, with(k, 1, Variant::on2vec)).trainable_count() ==
              trainable_parameter_count(Variant::on2vec, c, r, k));
    }
}

TEST_CASE("initialisation is seeded") {
    const auto a = init_params(20, 3, with(8, 4, Variant::on2vec));
    const auto b = init_params(20, 3, with(8, 4, Variant::on2vec));
    const auto c = init_params(20, 3, with(8, 5, Variant::on2vec));
    CHECK(bit_identical(a, b));
    CHECK_FALSE(bit_identical(a, c));
}

TEST_CASE("variant and norm names round trip") {
    for (auto v : {Variant::on2vec, Variant::transr, Variant::transe}) CHECK(parse_variant(to_string(v)) == v);
    for (auto n : {NormOrder::l1, NormOrder::l2}) CHECK(parse_norm(to_string(n)) == n);
    CHECK_THROWS_AS(parse_variant("transh"), InputError);
    CHECK_THROWS_AS(parse_norm("l3"), InputError);
}

TEST_CASE("config bounds") {
    TrainConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.alpha2 = 1.5;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    cfg.alpha2 = 1.0;
    CHECK_NOTHROW(cfg.validate());
    cfg.k = 0;
    CHECK_THROWS_AS(cfg.validate(), InputError);
}

#pragma once

#include "on2vec/graph.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace on2vec {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// on2vec: separate source and target projection per relation.
// transr: one shared projection per relation (proj1 == proj2 always).
// transe: identity projections, never trained.
enum class Variant { on2vec, transr, transe };

enum class NormOrder { l1 = 1, l2 = 2 };

enum class Slot { source, target };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view text);
std::string_view to_string(NormOrder n);
NormOrder parse_norm(std::string_view text);

struct TrainConfig {
    int k = 50;
    double gamma1 = 0.5;   // CSM margin
    double gamma2 = 0.5;   // HM margin
    double lambda = 0.001; // learning rate
    double alpha1 = 0.75;  // HM weight
    double alpha2 = 0.5;   // soft-constraint weight, in (0, 1]
    int batch_size = 100;
    NormOrder norm = NormOrder::l2;
    Variant variant = Variant::on2vec;
    std::uint64_t seed = 1;
    int max_epochs = 200;
    int patience = 5;

    // Throws InputError naming the violated bound.
    void validate() const;
};

// All trainable state: one k-vector per concept and relation, and two k x k
// projections per relation.
struct ModelParams {
    Variant variant = Variant::on2vec;
    int k = 0;
    std::vector<Vector> concepts;
    std::vector<Vector> relations;
    std::vector<Matrix> proj1;
    std::vector<Matrix> proj2;
    // Symbol names carried for checkpoints and name-based lookups. Either
    // empty or sized like the arrays.
    std::vector<std::string> concept_names;
    std::vector<std::string> relation_names;

    std::size_t num_concepts() const { return concepts.size(); }
    std::size_t num_relations() const { return relations.size(); }

    // Trainable scalars under the variant: n_c k + n_r k, plus n_r k^2 for
    // transr and 2 n_r k^2 for on2vec.
    std::size_t trainable_count() const;

    bool all_finite() const;
};

// Element-wise bit equality of every array, names and variant included.
bool bit_identical(const ModelParams& a, const ModelParams& b);

std::size_t trainable_parameter_count(Variant v, std::size_t n_concepts, std::size_t n_relations, int k);

// Unit-sphere vectors and seeded random orthogonal projections (identity for
// transe; proj2 copies proj1 for transr).
ModelParams init_params(std::size_t n_concepts, std::size_t n_relations, const TrainConfig& cfg);

// Same, taking sizes and names from a graph.
ModelParams init_params(const OntologyGraph& g, const TrainConfig& cfg);

Vector random_unit_vector(int k, std::mt19937_64& rng);

// Q from the QR factorisation of a k x k standard Gaussian matrix, columns
// flipped so that diag(R) >= 0.
Matrix random_orthogonal_matrix(int k, std::mt19937_64& rng);

// M_{1,r} v for the source slot, M_{2,r} v for the target slot.
Vector project(const ModelParams& p, RelationId r, const Vector& v, Slot slot);

} // namespace on2vec

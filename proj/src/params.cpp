#include "on2vec/params.hpp"

#include "on2vec/errors.hpp"

#include <cmath>
#include <cstring>

namespace on2vec {

std::string_view to_string(Variant v) {
    switch (v) {
    case Variant::on2vec: return "on2vec";
    case Variant::transr: return "transr";
    case Variant::transe: return "transe";
    }
    return "?";
}

Variant parse_variant(std::string_view text) {
    if (text == "on2vec") return Variant::on2vec;
    if (text == "transr") return Variant::transr;
    if (text == "transe") return Variant::transe;
    throw InputError("unknown variant '" + std::string(text) + "' (expected on2vec, transr or transe)");
}

std::string_view to_string(NormOrder n) { return n == NormOrder::l1 ? "l1" : "l2"; }

NormOrder parse_norm(std::string_view text) {
    if (text == "l1" || text == "1") return NormOrder::l1;
    if (text == "l2" || text == "2") return NormOrder::l2;
    throw InputError("unknown norm '" + std::string(text) + "' (expected l1 or l2)");
}

void TrainConfig::validate() const {
    auto fail = [](const std::string& what) { throw InputError("invalid setting: " + what); };
    if (k < 2) fail("k >= 2 required, got " + std::to_string(k));
    if (!(gamma1 > 0)) fail("gamma1 > 0 required");
    if (!(gamma2 > 0)) fail("gamma2 > 0 required");
    if (!(lambda > 0)) fail("lambda > 0 required");
    if (!(alpha1 >= 0)) fail("alpha1 >= 0 required");
    if (!(alpha2 > 0 && alpha2 <= 1)) fail("alpha2 must lie in (0, 1]");
    if (batch_size < 1) fail("batch_size >= 1 required");
    if (max_epochs < 0) fail("max_epochs >= 0 required");
    if (patience < 0) fail("patience >= 0 required");
}

std::size_t trainable_parameter_count(Variant v, std::size_t n_c, std::size_t n_r, int k) {
    const std::size_t kk = static_cast<std::size_t>(k);
    std::size_t count = n_c * kk + n_r * kk;
    if (v == Variant::transr) count += n_r * kk * kk;
    if (v == Variant::on2vec) count += 2 * n_r * kk * kk;
    return count;
}

std::size_t ModelParams::trainable_count() const {
    return trainable_parameter_count(variant, num_concepts(), num_relations(), k);
}

bool ModelParams::all_finite() const {
    auto finite = [](const auto& xs) {
        for (const auto& x : xs)
            if (!x.allFinite()) return false;
        return true;
    };
    return finite(concepts) && finite(relations) && finite(proj1) && finite(proj2);
}

namespace {

template <class T>
bool same_bits(const std::vector<T>& a, const std::vector<T>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].rows() != b[i].rows() || a[i].cols() != b[i].cols()) return false;
        if (std::memcmp(a[i].data(), b[i].data(), sizeof(double) * a[i].size()) != 0) return false;
    }
    return true;
}

} // namespace

bool bit_identical(const ModelParams& a, const ModelParams& b) {
    return a.variant == b.variant && a.k == b.k && a.concept_names == b.concept_names &&
           a.relation_names == b.relation_names && same_bits(a.concepts, b.concepts) &&
           same_bits(a.relations, b.relations) && same_bits(a.proj1, b.proj1) &&
           same_bits(a.proj2, b.proj2);
}

Vector random_unit_vector(int k, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector v(k);
    double norm = 0.0;
    do {
        for (int i = 0; i < k; ++i) v[i] = gauss(rng);
        norm = v.norm();
    } while (norm < 1e-12);
    return v / norm;
}

Matrix random_orthogonal_matrix(int k, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix a(k, k);
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < k; ++i) a(i, j) = gauss(rng);
    Eigen::HouseholderQR<Matrix> qr(a);
    Matrix q = qr.householderQ();
    const Matrix& r = qr.matrixQR();
    for (int i = 0; i < k; ++i)
        if (r(i, i) < 0) q.col(i) = -q.col(i);
    return q;
}

ModelParams init_params(std::size_t n_c, std::size_t n_r, const TrainConfig& cfg) {
    if (cfg.k < 2) throw InputError("k >= 2 required for orthogonal initialisation, got " + std::to_string(cfg.k));
    if (n_c < 1 || n_r < 1) throw InputError("need at least one concept and one relation");

    std::mt19937_64 rng(cfg.seed);
    ModelParams p;
    p.variant = cfg.variant;
    p.k = cfg.k;
    p.concepts.reserve(n_c);
    for (std::size_t i = 0; i < n_c; ++i) p.concepts.push_back(random_unit_vector(cfg.k, rng));
    p.relations.reserve(n_r);
    for (std::size_t i = 0; i < n_r; ++i) p.relations.push_back(random_unit_vector(cfg.k, rng));
    p.proj1.reserve(n_r);
    p.proj2.reserve(n_r);
    for (std::size_t i = 0; i < n_r; ++i) {
        switch (cfg.variant) {
        case Variant::transe:
            p.proj1.push_back(Matrix::Identity(cfg.k, cfg.k));
            p.proj2.push_back(Matrix::Identity(cfg.k, cfg.k));
            break;
        case Variant::transr:
            p.proj1.push_back(random_orthogonal_matrix(cfg.k, rng));
            p.proj2.push_back(p.proj1.back());
            break;
        case Variant::on2vec:
            p.proj1.push_back(random_orthogonal_matrix(cfg.k, rng));
            p.proj2.push_back(random_orthogonal_matrix(cfg.k, rng));
            break;
        }
    }
    return p;
}

ModelParams init_params(const OntologyGraph& g, const TrainConfig& cfg) {
    ModelParams p = init_params(g.num_concepts(), g.num_relations(), cfg);
    p.concept_names = g.concept_names();
    for (const auto& m : g.relations()) p.relation_names.push_back(m.name);
    return p;
}

Vector project(const ModelParams& p, RelationId r, const Vector& v, Slot slot) {
    if (r >= p.num_relations()) throw InputError("unknown relation id " + std::to_string(r));
    if (v.size() != p.k)
        throw ContractViolation("project: vector has length " + std::to_string(v.size()) +
                                ", expected " + std::to_string(p.k));
    return slot == Slot::source ? Vector(p.proj1[r] * v) : Vector(p.proj2[r] * v);
}

} // namespace on2vec

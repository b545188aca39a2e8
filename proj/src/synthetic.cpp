#include "on2vec/synthetic.hpp"

#include "on2vec/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <random>
#include <unordered_set>

namespace on2vec {

namespace {

enum Rel : RelationId { is_a, has_part, precedes, similar_to, related_to, used_for };

class Builder {
public:
    explicit Builder(std::uint64_t seed) : rng_(seed) {}

    std::size_t index(std::size_t size) { return std::uniform_int_distribution<std::size_t>(0, size - 1)(rng_); }
    template <class T>
    const T& pick(const std::vector<T>& v) { return v[index(v.size())]; }
    template <class T>
    void shuffle(std::vector<T>& v) { std::shuffle(v.begin(), v.end(), rng_); }

    bool pair_free(ConceptId a, ConceptId b) const { return a != b && !pairs_.count(key(a, b)); }

    void add(ConceptId s, RelationId r, ConceptId t) {
        pairs_.insert(key(s, t));
        triples_.push_back({s, r, t});
        ++count_[r];
    }

    // Adds candidate pairs in order until relation r holds `target` facts.
    void fill(RelationId r, const std::vector<std::pair<ConceptId, ConceptId>>& candidates, std::size_t target) {
        for (auto [s, t] : candidates) {
            if (count_[r] >= target) return;
            if (pair_free(s, t)) add(s, r, t);
        }
    }

    std::size_t count(RelationId r) const { return count_[r]; }
    const std::vector<Triple>& triples() const { return triples_; }

private:
    static std::uint64_t key(ConceptId a, ConceptId b) {
        if (a > b) std::swap(a, b);
        return (std::uint64_t{a} << 32) | b;
    }

    std::mt19937_64 rng_;
    std::unordered_set<std::uint64_t> pairs_;
    std::vector<Triple> triples_;
    std::array<std::size_t, 6> count_{};
};

[[noreturn]] void infeasible(const std::string& why) { throw InputError("infeasible synthetic mix: " + why); }

using Pairs = std::vector<std::pair<ConceptId, ConceptId>>;

// Concept roles. A tenth of the concepts are classes arranged in a forest;
// the rest are items split evenly into wholes and parts, each item filed
// under one class.
struct Layout {
    std::vector<ConceptId> classes, wholes, parts;
    std::vector<ConceptId> parent;
    std::vector<int> depth;
    std::vector<ConceptId> whole_classes, part_classes;

    ConceptId class_of(ConceptId item) const { return parent[item]; }
};

void add_ancestors(Builder& b, const Layout& l, ConceptId c) {
    for (ConceptId a = l.parent[c];; a = l.parent[a]) {
        b.add(c, is_a, a);
        if (l.depth[a] == 0) break;
    }
}

// Three class roots: wholes file under the first and third, parts under the
// second and third. Classes sit at depth <= 3, so items sit at depth <= 4.
// Items only take classes of depth >= 2 when the pool has any.
// isA facts link every concept to all of its ancestors.
Layout grow_taxonomy(Builder& b, int n, std::size_t target) {
    std::vector<ConceptId> ids(static_cast<std::size_t>(n));
    std::iota(ids.begin(), ids.end(), 0);
    b.shuffle(ids);

    Layout l;
    const auto nk = static_cast<std::size_t>(std::max(4, n / 10));
    l.classes.assign(ids.begin(), ids.begin() + nk);
    const auto half = nk + (ids.size() - nk) / 2;
    l.wholes.assign(ids.begin() + nk, ids.begin() + half);
    l.parts.assign(ids.begin() + half, ids.end());
    l.parent.assign(ids.size(), 0);
    l.depth.assign(ids.size(), -1);

    // Non-root classes join the three subtrees in turn.
    std::vector<ConceptId> root(ids.size(), 0);
    std::array<std::vector<ConceptId>, 3> open;
    for (std::size_t i = 0; i < nk; ++i) {
        const ConceptId c = l.classes[i];
        auto& subtree = open[i % 3];
        if (i < 3) {
            l.depth[c] = 0;
            root[c] = c;
        } else {
            const ConceptId p = b.pick(subtree);
            l.parent[c] = p;
            l.depth[c] = l.depth[p] + 1;
            root[c] = root[p];
            add_ancestors(b, l, c);
        }
        if (l.depth[c] < 3) subtree.push_back(c);
    }
    // Items file under the deepest available classes.
    for (int min_depth = 2; min_depth >= 0 && (l.whole_classes.empty() || l.part_classes.empty()); --min_depth) {
        l.whole_classes.clear();
        l.part_classes.clear();
        for (ConceptId c : l.classes) {
            if (l.depth[c] < min_depth) continue;
            if (root[c] != l.classes[1]) l.whole_classes.push_back(c);
            if (root[c] != l.classes[0]) l.part_classes.push_back(c);
        }
    }

    std::vector<ConceptId> items(ids.begin() + nk, ids.end());
    b.shuffle(items);
    const std::unordered_set<ConceptId> wholes(l.wholes.begin(), l.wholes.end());
    for (ConceptId c : items) {
        const ConceptId p = b.pick(wholes.count(c) ? l.whole_classes : l.part_classes);
        l.parent[c] = p;
        l.depth[c] = l.depth[p] + 1;
        if (b.count(is_a) < target) add_ancestors(b, l, c);
    }
    if (b.count(is_a) < target) infeasible("too few concepts for the requested isA share");
    return l;
}

std::map<ConceptId, std::vector<ConceptId>> by_class(const Layout& l, const std::vector<ConceptId>& items) {
    std::map<ConceptId, std::vector<ConceptId>> out;
    for (ConceptId c : items) out[l.class_of(c)].push_back(c);
    return out;
}

// Each whole class owns a kit drawn from the parts; wholes take parts from
// their class kit.
void grow_parts(Builder& b, const Layout& l, std::size_t target) {
    const std::size_t kit = std::max<std::size_t>(1, l.parts.size() * 45 / 100);
    std::map<ConceptId, std::vector<ConceptId>> kits;
    for (ConceptId c : l.whole_classes) {
        auto v = l.parts;
        b.shuffle(v);
        v.resize(std::min(kit, v.size()));
        kits[c] = std::move(v);
    }
    Pairs candidates;
    for (ConceptId w : l.wholes)
        for (ConceptId q : kits[l.class_of(w)]) candidates.emplace_back(w, q);
    b.shuffle(candidates);
    b.fill(has_part, candidates, target);
}

// Sequences of 15 items, parts first, each linked to its successors up to
// four steps ahead.
void grow_sequences(Builder& b, const Layout& l, std::size_t target) {
    constexpr std::size_t length = 15, window = 4;
    auto v = l.parts;
    b.shuffle(v);
    auto w = l.wholes;
    b.shuffle(w);
    v.insert(v.end(), w.begin(), w.end());
    Pairs candidates;
    for (std::size_t s = 0; s + length <= v.size(); s += length)
        for (std::size_t i = 0; i < length; ++i)
            for (std::size_t j = i + 1; j < length && j - i <= window; ++j)
                candidates.emplace_back(v[s + i], v[s + j]);
    b.fill(precedes, candidates, target);
}

// Cliques of up to four wholes of one class, every pair stored both ways.
void grow_similar(Builder& b, const Layout& l, std::size_t target) {
    const auto groups = by_class(l, l.wholes);
    std::vector<const std::vector<ConceptId>*> usable;
    for (const auto& [c, members] : groups)
        if (members.size() >= 2) usable.push_back(&members);
    if (usable.empty() && target > 0) infeasible("no class holds two wholes for similarTo cliques");
    std::size_t misses = 0;
    while (b.count(similar_to) + 1 < target) {
        auto members = *b.pick(usable);
        b.shuffle(members);
        std::vector<ConceptId> clique;
        for (ConceptId c : members) {
            if (clique.size() == 4) break;
            if (std::all_of(clique.begin(), clique.end(), [&](ConceptId d) { return b.pair_free(c, d); }))
                clique.push_back(c);
        }
        if (clique.size() < 2) {
            if (++misses > 100000) infeasible("cannot place similarTo cliques on free concept pairs");
            continue;
        }
        for (std::size_t i = 0; i < clique.size(); ++i)
            for (std::size_t j = i + 1; j < clique.size() && b.count(similar_to) < target; ++j) {
                b.add(clique[i], similar_to, clique[j]);
                b.add(clique[j], similar_to, clique[i]);
            }
    }
}

// relatedTo: each class points at the wholes of one whole class.
// usedFor: each part class points at the wholes of one whole class.
void grow_plain(Builder& b, const Layout& l, std::size_t related, std::size_t used) {
    const auto wholes = by_class(l, l.wholes);
    std::vector<ConceptId> keys;
    for (const auto& [c, members] : wholes) keys.push_back(c);

    Pairs candidates;
    for (ConceptId c : l.classes)
        for (ConceptId w : wholes.at(b.pick(keys))) candidates.emplace_back(c, w);
    b.shuffle(candidates);
    b.fill(related_to, candidates, related);

    std::map<ConceptId, ConceptId> target_class;
    for (ConceptId c : l.part_classes) target_class[c] = b.pick(keys);
    candidates.clear();
    for (ConceptId q : l.parts)
        for (ConceptId w : wholes.at(target_class.at(l.class_of(q)))) candidates.emplace_back(q, w);
    b.shuffle(candidates);
    b.fill(used_for, candidates, used);
}

} // namespace

std::vector<RelationMeta> synthetic_relations() {
    std::vector<RelationMeta> meta(6);
    meta[is_a] = {is_a, "isA", true, false, false, true};
    meta[has_part] = {has_part, "hasPart", false, false, true, false};
    meta[precedes] = {precedes, "precedes", true, false, false, false};
    meta[similar_to] = {similar_to, "similarTo", false, true, false, false};
    meta[related_to] = {related_to, "relatedTo", false, false, false, false};
    meta[used_for] = {used_for, "usedFor", false, false, false, false};
    return meta;
}

SyntheticOntology generate_synthetic_ontology(const SyntheticSpec& spec, std::uint64_t seed) {
    if (spec.concepts < 10) infeasible("need at least 10 concepts");
    if (spec.triples < 20) infeasible("need at least 20 triples");
    if (!(spec.prop >= 0 && spec.prop <= 1) || !(spec.hier >= 0 && spec.hier <= 1))
        infeasible("percentages must lie in [0, 1]");
    const double pairs = 0.5 * spec.concepts * (spec.concepts - 1.0);
    if (spec.triples > 0.25 * pairs) infeasible("too many triples for the concept count");

    const double n = spec.triples;
    // isA facts count towards both shares.
    const double both = std::max(spec.prop + spec.hier - 1.0, 0.5 * std::min(spec.prop, spec.hier));
    const auto x = static_cast<std::size_t>(std::llround(both * n));
    const auto hier_total = static_cast<std::size_t>(std::llround(spec.hier * n));
    const auto prop_total = static_cast<std::size_t>(std::llround(spec.prop * n));
    const std::size_t h = hier_total - std::min(hier_total, x);
    const std::size_t p = prop_total - std::min(prop_total, x);
    const std::size_t used = x + h + p;
    const auto total = static_cast<std::size_t>(spec.triples);
    const std::size_t o = used < total ? total - used : 0;

    Builder b(seed);
    const Layout layout = grow_taxonomy(b, spec.concepts, x);
    grow_parts(b, layout, h);
    grow_sequences(b, layout, p / 2);
    grow_similar(b, layout, p - p / 2);
    grow_plain(b, layout, o / 2, o - o / 2);

    std::vector<std::string> names;
    for (int i = 0; i < spec.concepts; ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "c%04d", i);
        names.emplace_back(buf);
    }
    // Rebuild through names so ids follow first appearance like a loaded file.
    OntologyGraph scratch(names, synthetic_relations(), b.triples());
    const auto raw = scratch.to_raw();
    SyntheticOntology out{OntologyGraph::build(raw, synthetic_relations()), {}};

    const auto stats = dataset_stats(out.graph);
    if (std::abs(stats.pct_property() - 100.0 * spec.prop) > 5.0 ||
        std::abs(stats.pct_hierarchical() - 100.0 * spec.hier) > 5.0)
        infeasible("measured mix (" + std::to_string(stats.pct_property()) + "% prop, " +
                   std::to_string(stats.pct_hierarchical()) + "% hier) misses the request by more than 5 points");
    out.split = split_dataset(out.graph, spec.split, seed);
    return out;
}

} // namespace on2vec

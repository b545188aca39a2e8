#include "on2vec/dataset.hpp"

#include "on2vec/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <random>
#include <unordered_map>
#include <unordered_set>

namespace on2vec {

namespace {

// Nodes that sit on a cycle of the directed edge set (self-loops included),
// found with an iterative Tarjan pass.
std::vector<char> cyclic_nodes(std::size_t n, const std::vector<std::vector<ConceptId>>& out) {
    constexpr int unvisited = -1;
    std::vector<int> index(n, unvisited), low(n, 0);
    std::vector<char> on_stack(n, 0), cyclic(n, 0);
    std::vector<ConceptId> stack;
    int counter = 0;

    struct Frame {
        ConceptId node;
        std::size_t next;
    };
    for (ConceptId root = 0; root < n; ++root) {
        if (index[root] != unvisited || out[root].empty()) continue;
        std::vector<Frame> call{{root, 0}};
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = 1;
        while (!call.empty()) {
            auto& f = call.back();
            if (f.next < out[f.node].size()) {
                ConceptId w = out[f.node][f.next++];
                if (w == f.node) {
                    cyclic[w] = 1;
                } else if (index[w] == unvisited) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.node] = std::min(low[f.node], index[w]);
                }
                continue;
            }
            ConceptId v = f.node;
            call.pop_back();
            if (!call.empty()) low[call.back().node] = std::min(low[call.back().node], low[v]);
            if (low[v] == index[v]) {
                std::vector<ConceptId> component;
                ConceptId w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    component.push_back(w);
                } while (w != v);
                if (component.size() > 1)
                    for (auto c : component) cyclic[c] = 1;
            }
        }
    }
    return cyclic;
}

} // namespace

TruncationResult truncate_transitive(const OntologyGraph& g, int max_hops) {
    if (max_hops < 1) throw InputError("max hops must be at least 1");
    const std::size_t n = g.num_concepts();
    std::vector<char> keep(g.num_triples(), 1);
    TruncationResult result;

    for (const auto& meta : g.relations()) {
        if (!meta.transitive) continue;
        const RelationId r = meta.id;

        std::vector<std::vector<ConceptId>> out(n);
        std::vector<std::size_t> facts;
        for (std::size_t i = 0; i < g.num_triples(); ++i) {
            const auto& t = g.triples()[i];
            if (t.relation != r) continue;
            out[t.source].push_back(t.target);
            facts.push_back(i);
        }
        if (facts.empty()) continue;

        const auto cyclic = cyclic_nodes(n, out);

        std::vector<std::vector<ConceptId>> base(n);
        for (ConceptId s = 0; s < n; ++s) {
            for (ConceptId t : out[s]) {
                if (t == s) continue;
                bool has_intermediate = false;
                for (ConceptId m : out[s]) {
                    if (m == s || m == t) continue;
                    if (g.contains({m, r, t})) {
                        has_intermediate = true;
                        break;
                    }
                }
                if (!has_intermediate) base[s].push_back(t);
            }
        }

        constexpr int unreachable = std::numeric_limits<int>::max();
        std::unordered_map<ConceptId, std::vector<int>> dist_from;
        auto distances = [&](ConceptId s) -> const std::vector<int>& {
            auto it = dist_from.find(s);
            if (it != dist_from.end()) return it->second;
            std::vector<int> dist(n, unreachable);
            std::deque<ConceptId> queue{s};
            dist[s] = 0;
            while (!queue.empty()) {
                ConceptId v = queue.front();
                queue.pop_front();
                for (ConceptId w : base[v]) {
                    if (dist[w] != unreachable) continue;
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
            return dist_from.emplace(s, std::move(dist)).first->second;
        };

        std::size_t kept_on_cycles = 0;
        for (std::size_t i : facts) {
            const auto& t = g.triples()[i];
            if (cyclic[t.source] || cyclic[t.target]) {
                ++kept_on_cycles;
                continue;
            }
            int d = distances(t.source)[t.target];
            if (d == unreachable) {
                ++kept_on_cycles;
            } else if (d > max_hops) {
                keep[i] = 0;
                ++result.discarded;
            }
        }
        if (kept_on_cycles > 0)
            result.warnings.push_back("transitive relation '" + meta.name + "' has " +
                                      std::to_string(kept_on_cycles) +
                                      " facts on or across cycles; kept without hop check");
    }

    std::vector<Triple> kept;
    kept.reserve(g.num_triples() - result.discarded);
    for (std::size_t i = 0; i < g.num_triples(); ++i)
        if (keep[i]) kept.push_back(g.triples()[i]);
    result.graph = g.with_triples(kept);
    return result;
}

DatasetSplit split_dataset(const OntologyGraph& g, SplitFractions f, std::uint64_t seed) {
    if (!(f.train > 0 && f.valid > 0 && f.test > 0))
        throw InputError("split fractions must all be positive");
    if (std::abs(f.train + f.valid + f.test - 1.0) > 1e-9)
        throw InputError("split fractions must sum to 1");

    const std::size_t n = g.num_triples();
    const auto n_valid = static_cast<std::size_t>(std::llround(static_cast<double>(n) * f.valid));
    const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * f.test));
    if (n_valid + n_test > n) throw InputError("graph too small for the requested split");
    const std::size_t n_train = n - n_valid - n_test;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<char> concept_seen(g.num_concepts(), 0), relation_seen(g.num_relations(), 0);
    std::vector<char> pinned(n, 0);
    std::vector<std::string> overflow;
    std::size_t pinned_count = 0;
    for (std::size_t i : order) {
        const auto& t = g.triples()[i];
        std::vector<std::string> newly;
        if (!concept_seen[t.source]) newly.push_back("concept " + g.concept_name(t.source));
        if (!concept_seen[t.target] && t.target != t.source)
            newly.push_back("concept " + g.concept_name(t.target));
        if (!relation_seen[t.relation]) newly.push_back("relation " + g.relation(t.relation).name);
        if (newly.empty()) continue;
        concept_seen[t.source] = concept_seen[t.target] = relation_seen[t.relation] = 1;
        pinned[i] = 1;
        if (++pinned_count > n_train) overflow.insert(overflow.end(), newly.begin(), newly.end());
    }
    if (!overflow.empty()) {
        std::string msg = "training share too small to cover every symbol; uncoverable:";
        for (const auto& s : overflow) msg += " " + s + ";";
        throw InputError(msg);
    }

    std::vector<char> part(n, 0);  // 0 train, 1 valid, 2 test
    std::size_t train_fill = pinned_count, valid_fill = 0;
    for (std::size_t i : order) {
        if (pinned[i]) continue;
        if (train_fill < n_train) {
            ++train_fill;
        } else if (valid_fill < n_valid) {
            part[i] = 1;
            ++valid_fill;
        } else {
            part[i] = 2;
        }
    }

    DatasetSplit split;
    split.train.reserve(n_train);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& t = g.triples()[i];
        (part[i] == 0 ? split.train : part[i] == 1 ? split.valid : split.test).push_back(t);
    }
    return split;
}

DatasetStats dataset_stats(const OntologyGraph& g) {
    DatasetStats s;
    s.triples = g.num_triples();
    std::vector<char> concept_used(g.num_concepts(), 0), relation_used(g.num_relations(), 0);
    for (const auto& t : g.triples()) {
        const auto& m = g.relation(t.relation);
        if (m.has_property()) ++s.with_property;
        if (m.hierarchical()) ++s.hierarchical;
        concept_used[t.source] = concept_used[t.target] = 1;
        relation_used[t.relation] = 1;
    }
    s.concepts = static_cast<std::size_t>(std::count(concept_used.begin(), concept_used.end(), 1));
    s.relations = static_cast<std::size_t>(std::count(relation_used.begin(), relation_used.end(), 1));
    return s;
}

} // namespace on2vec

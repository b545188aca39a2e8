#pragma once

#include "on2vec/graph.hpp"
#include "on2vec/params.hpp"
#include "on2vec/synthetic.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace on2vec {

namespace fs = std::filesystem;

// Triple files: `source<TAB>relation<TAB>target` per line, `#` comment lines
// and blank lines skipped. Errors cite `<origin>:<line>`.
std::vector<RawTriple> parse_triples(std::istream& in, const std::string& origin);
std::vector<RawTriple> load_triples(const fs::path& path);
std::string format_triples(std::span<const RawTriple> triples);

// Relation metadata: `name<TAB>flags`, flags a comma-separated subset of
// transitive, symmetric, refinement, coercion, or the word `other`.
std::vector<RelationMeta> parse_relation_meta(std::istream& in, const std::string& origin);
std::vector<RelationMeta> load_relation_meta(const fs::path& path);
std::string format_relation_meta(std::span<const RelationMeta> meta);

// Labelled verification cases: `source<TAB>relation<TAB>target<TAB>label`,
// label `1` (positive) or `0` (negative).
struct LabelledTriple {
    RawTriple triple;
    bool positive = true;
    bool operator==(const LabelledTriple&) const = default;
};
std::vector<LabelledTriple> parse_cases(std::istream& in, const std::string& origin);
std::vector<LabelledTriple> load_cases(const fs::path& path);
std::string format_cases(std::span<const LabelledTriple> cases);

// Concept pairs `source<TAB>target` for prediction.
std::vector<std::pair<std::string, std::string>> load_pairs(const fs::path& path);

// Synthetic generator spec, `key=value` lines: concepts, triples, prop,
// hier, split (three comma-separated fractions).
SyntheticSpec parse_synthetic_spec(std::istream& in, const std::string& origin);
SyntheticSpec load_synthetic_spec(const fs::path& path);
std::string format_synthetic_spec(const SyntheticSpec& spec);

// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const fs::path& path, const std::string& content);
std::string read_file(const fs::path& path);

struct CheckpointExpectation {
    std::optional<std::size_t> concepts;
    std::optional<std::size_t> relations;
    std::optional<int> k;
    std::optional<Variant> variant;
};

// Header `on2vec-ckpt v1 <n_c> <n_r> <k> <variant>`, one concept name per
// line, one relation name per line, then little-endian float64 arrays:
// concept vectors, relation vectors, proj1, proj2, each matrix row-major.
std::string encode_checkpoint(const ModelParams& p);
ModelParams decode_checkpoint(const std::string& bytes, const CheckpointExpectation& expect = {});
void save_checkpoint(const ModelParams& p, const fs::path& path);
ModelParams load_checkpoint(const fs::path& path, const CheckpointExpectation& expect = {});

} // namespace on2vec

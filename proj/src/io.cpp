#include "on2vec/io.hpp"

#include "on2vec/errors.hpp"
#include "on2vec/log.hpp"
#include "on2vec/text.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace on2vec {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

// Strips a trailing CR; reports whether the line carries content.
bool next_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

bool skippable(const std::string& line) { return line.empty() || line.front() == '#'; }

std::ifstream open_input(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    return in;
}

[[noreturn]] void fail_at(const std::string& origin, std::size_t line, const std::string& what) {
    throw InputError(origin + ":" + std::to_string(line) + ": " + what);
}

} // namespace

std::vector<RawTriple> parse_triples(std::istream& in, const std::string& origin) {
    std::vector<RawTriple> out;
    std::string line;
    std::size_t no = 0;
    while (next_line(in, line)) {
        ++no;
        if (skippable(line)) continue;
        auto fields = split(line, '\t');
        if (fields.size() != 3)
            fail_at(origin, no, "expected 3 tab-separated fields, found " + std::to_string(fields.size()));
        for (const auto& f : fields)
            if (f.empty()) fail_at(origin, no, "empty field");
        out.push_back({std::move(fields[0]), std::move(fields[1]), std::move(fields[2]), no});
    }
    if (out.empty()) warn(origin + ": no triples");
    return out;
}

std::vector<RawTriple> load_triples(const fs::path& path) {
    auto in = open_input(path);
    return parse_triples(in, path.string());
}

std::string format_triples(std::span<const RawTriple> triples) {
    std::string out;
    for (const auto& t : triples) {
        if (t.source.find_first_of("\t\n") != std::string::npos ||
            t.relation.find_first_of("\t\n") != std::string::npos ||
            t.target.find_first_of("\t\n") != std::string::npos)
            throw InputError("names may not contain tabs or newlines");
        out += t.source + '\t' + t.relation + '\t' + t.target + '\n';
    }
    return out;
}

std::vector<RelationMeta> parse_relation_meta(std::istream& in, const std::string& origin) {
    std::vector<RelationMeta> out;
    std::string line;
    std::size_t no = 0;
    while (next_line(in, line)) {
        ++no;
        if (skippable(line)) continue;
        const auto fields = split(line, '\t');
        if (fields.size() != 2) fail_at(origin, no, "expected `name<TAB>flags`");
        RelationMeta m;
        m.id = static_cast<RelationId>(out.size());
        m.name = fields[0];
        if (m.name.empty()) fail_at(origin, no, "empty relation name");
        const auto flags = split(fields[1], ',');
        for (const auto& raw : flags) {
            const auto f = trim(raw);
            if (f == "transitive") m.transitive = true;
            else if (f == "symmetric") m.symmetric = true;
            else if (f == "refinement") m.refinement = true;
            else if (f == "coercion") m.coercion = true;
            else if (f == "other") {
                if (flags.size() != 1) fail_at(origin, no, "`other` cannot be combined with other flags");
            } else {
                fail_at(origin, no, "unknown flag '" + f + "'");
            }
        }
        if (m.refinement && m.coercion) fail_at(origin, no, "refinement and coercion are exclusive");
        for (const auto& prev : out)
            if (prev.name == m.name) fail_at(origin, no, "duplicate relation '" + m.name + "'");
        out.push_back(std::move(m));
    }
    return out;
}

std::vector<RelationMeta> load_relation_meta(const fs::path& path) {
    auto in = open_input(path);
    return parse_relation_meta(in, path.string());
}

std::string format_relation_meta(std::span<const RelationMeta> meta) {
    std::string out;
    for (const auto& m : meta) {
        std::string flags;
        auto add = [&flags](bool on, const char* name) {
            if (!on) return;
            if (!flags.empty()) flags += ',';
            flags += name;
        };
        add(m.transitive, "transitive");
        add(m.symmetric, "symmetric");
        add(m.refinement, "refinement");
        add(m.coercion, "coercion");
        out += m.name + '\t' + (flags.empty() ? "other" : flags) + '\n';
    }
    return out;
}

std::vector<LabelledTriple> parse_cases(std::istream& in, const std::string& origin) {
    std::vector<LabelledTriple> out;
    std::string line;
    std::size_t no = 0;
    while (next_line(in, line)) {
        ++no;
        if (skippable(line)) continue;
        auto fields = split(line, '\t');
        if (fields.size() != 4)
            fail_at(origin, no, "expected 4 tab-separated fields, found " + std::to_string(fields.size()));
        for (std::size_t i = 0; i < 3; ++i)
            if (fields[i].empty()) fail_at(origin, no, "empty field");
        if (fields[3] != "1" && fields[3] != "0") fail_at(origin, no, "label must be 1 or 0");
        out.push_back({{std::move(fields[0]), std::move(fields[1]), std::move(fields[2]), no}, fields[3] == "1"});
    }
    return out;
}

std::vector<LabelledTriple> load_cases(const fs::path& path) {
    auto in = open_input(path);
    return parse_cases(in, path.string());
}

std::string format_cases(std::span<const LabelledTriple> cases) {
    std::string out;
    for (const auto& c : cases) {
        auto line = format_triples(std::span(&c.triple, 1));
        line.back() = '\t';
        out += line + (c.positive ? "1\n" : "0\n");
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> load_pairs(const fs::path& path) {
    auto in = open_input(path);
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    std::size_t no = 0;
    while (next_line(in, line)) {
        ++no;
        if (skippable(line)) continue;
        const auto fields = split(line, '\t');
        if (fields.size() != 2) fail_at(path.string(), no, "expected `source<TAB>target`");
        out.emplace_back(fields[0], fields[1]);
    }
    return out;
}

SyntheticSpec parse_synthetic_spec(std::istream& in, const std::string& origin) {
    SyntheticSpec spec;
    std::string line;
    std::size_t no = 0;
    while (next_line(in, line)) {
        ++no;
        line = trim(line);
        if (skippable(line)) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail_at(origin, no, "expected key=value");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        try {
            if (key == "concepts") spec.concepts = std::stoi(value);
            else if (key == "triples") spec.triples = std::stoi(value);
            else if (key == "prop") spec.prop = std::stod(value);
            else if (key == "hier") spec.hier = std::stod(value);
            else if (key == "split") {
                const auto parts = split(value, ',');
                if (parts.size() != 3) fail_at(origin, no, "split needs three fractions");
                spec.split = {std::stod(parts[0]), std::stod(parts[1]), std::stod(parts[2])};
            } else {
                fail_at(origin, no, "unknown key '" + key + "'");
            }
        } catch (const std::logic_error&) {
            fail_at(origin, no, "bad value for '" + key + "'");
        }
    }
    return spec;
}

SyntheticSpec load_synthetic_spec(const fs::path& path) {
    auto in = open_input(path);
    return parse_synthetic_spec(in, path.string());
}

std::string format_synthetic_spec(const SyntheticSpec& spec) {
    return "concepts=" + std::to_string(spec.concepts) + "\ntriples=" + std::to_string(spec.triples) +
           "\nprop=" + format_double(spec.prop) + "\nhier=" + format_double(spec.hier) +
           "\nsplit=" + format_double(spec.split.train) + "," + format_double(spec.split.valid) + "," +
           format_double(spec.split.test) + "\n";
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
    auto in = open_input(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

namespace {

void put_double(std::string& out, double x) {
    auto bits = std::bit_cast<std::uint64_t>(x);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

double get_double(const char* p) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= std::uint64_t{static_cast<unsigned char>(p[i])} << (8 * i);
    return std::bit_cast<double>(bits);
}

std::vector<std::string> names_or_default(const std::vector<std::string>& names, std::size_t n, char prefix) {
    if (!names.empty()) {
        if (names.size() != n) throw InputError("name list does not match the parameter count");
        return names;
    }
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

} // namespace

std::string encode_checkpoint(const ModelParams& p) {
    const auto cn = names_or_default(p.concept_names, p.num_concepts(), 'c');
    const auto rn = names_or_default(p.relation_names, p.num_relations(), 'r');
    std::string out = "on2vec-ckpt v1 " + std::to_string(p.num_concepts()) + " " +
                      std::to_string(p.num_relations()) + " " + std::to_string(p.k) + " " +
                      std::string(to_string(p.variant)) + "\n";
    for (const auto* names : {&cn, &rn})
        for (const auto& n : *names) {
            if (n.empty() || n.find('\n') != std::string::npos)
                throw InputError("checkpoint names must be non-empty single lines");
            out += n + '\n';
        }
    const std::size_t k = static_cast<std::size_t>(p.k);
    out.reserve(out.size() + 8 * p.trainable_count() + 8 * p.num_relations() * k * k);
    for (const auto& v : p.concepts)
        for (std::size_t i = 0; i < k; ++i) put_double(out, v[static_cast<Eigen::Index>(i)]);
    for (const auto& v : p.relations)
        for (std::size_t i = 0; i < k; ++i) put_double(out, v[static_cast<Eigen::Index>(i)]);
    for (const auto* mats : {&p.proj1, &p.proj2})
        for (const auto& m : *mats)
            for (Eigen::Index i = 0; i < p.k; ++i)
                for (Eigen::Index j = 0; j < p.k; ++j) put_double(out, m(i, j));
    return out;
}

ModelParams decode_checkpoint(const std::string& bytes, const CheckpointExpectation& expect) {
    std::size_t pos = 0;
    auto line = [&](const char* what) {
        const auto end = bytes.find('\n', pos);
        if (end == std::string::npos) throw InputError(std::string("checkpoint truncated in ") + what);
        std::string out = bytes.substr(pos, end - pos);
        pos = end + 1;
        return out;
    };

    std::istringstream header(line("header"));
    std::string magic, version, variant;
    long long n_c = -1, n_r = -1, k = -1;
    header >> magic >> version >> n_c >> n_r >> k >> variant;
    if (magic != "on2vec-ckpt") throw InputError("not an on2vec checkpoint (bad magic)");
    if (version != "v1") throw InputError("unsupported checkpoint version '" + version + "', expected v1");
    if (!header || n_c < 1 || n_r < 1 || k < 2) throw InputError("malformed checkpoint header");
    std::string rest;
    if (header >> rest) throw InputError("malformed checkpoint header");

    auto mismatch = [](const char* what, auto expected, auto found) {
        std::ostringstream msg;
        msg << "checkpoint " << what << " mismatch: expected " << expected << ", found " << found;
        throw InputError(msg.str());
    };
    if (expect.k && *expect.k != k) mismatch("k", *expect.k, k);
    if (expect.concepts && static_cast<long long>(*expect.concepts) != n_c) mismatch("concept count", *expect.concepts, n_c);
    if (expect.relations && static_cast<long long>(*expect.relations) != n_r)
        mismatch("relation count", *expect.relations, n_r);
    const Variant v = parse_variant(variant);
    if (expect.variant && *expect.variant != v) mismatch("variant", to_string(*expect.variant), variant);

    ModelParams p;
    p.variant = v;
    p.k = static_cast<int>(k);
    for (long long i = 0; i < n_c; ++i) p.concept_names.push_back(line("concept names"));
    for (long long i = 0; i < n_r; ++i) p.relation_names.push_back(line("relation names"));

    const std::size_t kk = static_cast<std::size_t>(k);
    const std::size_t doubles = static_cast<std::size_t>(n_c + n_r) * kk + 2 * static_cast<std::size_t>(n_r) * kk * kk;
    if (bytes.size() - pos < 8 * doubles) throw InputError("checkpoint truncated in parameter arrays");
    if (bytes.size() - pos > 8 * doubles) throw InputError("checkpoint has trailing bytes");

    const char* data = bytes.data() + pos;
    auto next = [&data] {
        const double x = get_double(data);
        data += 8;
        return x;
    };
    auto read_vectors = [&](std::vector<Vector>& into, long long count) {
        for (long long i = 0; i < count; ++i) {
            Vector vec(k);
            for (long long j = 0; j < k; ++j) vec[j] = next();
            into.push_back(std::move(vec));
        }
    };
    auto read_matrices = [&](std::vector<Matrix>& into) {
        for (long long r = 0; r < n_r; ++r) {
            Matrix m(k, k);
            for (long long i = 0; i < k; ++i)
                for (long long j = 0; j < k; ++j) m(i, j) = next();
            into.push_back(std::move(m));
        }
    };
    read_vectors(p.concepts, n_c);
    read_vectors(p.relations, n_r);
    read_matrices(p.proj1);
    read_matrices(p.proj2);
    return p;
}

void save_checkpoint(const ModelParams& p, const fs::path& path) { write_file_atomic(path, encode_checkpoint(p)); }

ModelParams load_checkpoint(const fs::path& path, const CheckpointExpectation& expect) {
    return decode_checkpoint(read_file(path), expect);
}

} // namespace on2vec

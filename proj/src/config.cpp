#include "on2vec/config.hpp"

#include "on2vec/errors.hpp"
#include "on2vec/text.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>

namespace on2vec {

namespace {

struct Preset {
    int k;
    double gamma1;
    double lambda;
    NormOrder norm;
};

const std::map<std::string, Preset, std::less<>>& presets() {
    static const std::map<std::string, Preset, std::less<>> table{
        {"db3.6k", {25, 2.0, 0.005, NormOrder::l1}},
        {"cn30k", {50, 0.5, 0.001, NormOrder::l2}},
        {"yg15k", {50, 0.5, 0.001, NormOrder::l2}},
        {"yg60k", {100, 0.5, 0.001, NormOrder::l2}},
        {"desk", {50, 1.0, 0.005, NormOrder::l2}},
    };
    return table;
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
    T value{};
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end)
        throw InputError("bad value '" + std::string(text) + "' for " + std::string(key));
    return value;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

} // namespace

bool RunConfig::operator==(const RunConfig& o) const {
    const auto& a = train;
    const auto& b = o.train;
    return profile == o.profile && a.k == b.k && a.gamma1 == b.gamma1 && a.gamma2 == b.gamma2 &&
           a.lambda == b.lambda && a.alpha1 == b.alpha1 && a.alpha2 == b.alpha2 && a.batch_size == b.batch_size &&
           a.norm == b.norm && a.variant == b.variant && a.seed == b.seed && a.max_epochs == b.max_epochs &&
           a.patience == b.patience && train_path == o.train_path && valid_path == o.valid_path &&
           test_path == o.test_path && meta_path == o.meta_path && checkpoint_path == o.checkpoint_path &&
           report_path == o.report_path && log_path == o.log_path && threads == o.threads;
}

std::vector<std::string> profile_names() {
    std::vector<std::string> out;
    for (const auto& [name, preset] : presets()) out.push_back(name);
    return out;
}

void apply_profile(std::string_view name, TrainConfig& cfg) {
    const auto it = presets().find(name);
    if (it == presets().end()) {
        std::string known;
        for (const auto& n : profile_names()) known += " " + n;
        throw InputError("unknown profile '" + std::string(name) + "' (known:" + known + ")");
    }
    cfg.k = it->second.k;
    cfg.gamma1 = it->second.gamma1;
    cfg.lambda = it->second.lambda;
    cfg.norm = it->second.norm;
    cfg.gamma2 = 0.5;
    cfg.alpha1 = 0.75;
    cfg.alpha2 = 0.5;
}

void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value) {
    auto& t = cfg.train;
    if (key == "profile") {
        apply_profile(value, t);
        cfg.profile = std::string(value);
    } else if (key == "k") t.k = parse_number<int>(key, value);
    else if (key == "gamma1") t.gamma1 = parse_number<double>(key, value);
    else if (key == "gamma2") t.gamma2 = parse_number<double>(key, value);
    else if (key == "lambda") t.lambda = parse_number<double>(key, value);
    else if (key == "alpha1") t.alpha1 = parse_number<double>(key, value);
    else if (key == "alpha2") t.alpha2 = parse_number<double>(key, value);
    else if (key == "batch_size") t.batch_size = parse_number<int>(key, value);
    else if (key == "norm") t.norm = parse_norm(value);
    else if (key == "variant") t.variant = parse_variant(value);
    else if (key == "seed") t.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "max_epochs") t.max_epochs = parse_number<int>(key, value);
    else if (key == "patience") t.patience = parse_number<int>(key, value);
    else if (key == "threads") cfg.threads = parse_number<int>(key, value);
    else if (key == "train") cfg.train_path = std::string(value);
    else if (key == "valid") cfg.valid_path = std::string(value);
    else if (key == "test") cfg.test_path = std::string(value);
    else if (key == "meta") cfg.meta_path = std::string(value);
    else if (key == "checkpoint") cfg.checkpoint_path = std::string(value);
    else if (key == "report") cfg.report_path = std::string(value);
    else if (key == "log") cfg.log_path = std::string(value);
    else throw InputError("unknown key '" + std::string(key) + "'");
}

std::vector<Setting> read_settings(std::istream& in, const std::string& origin) {
    std::vector<Setting> out;
    std::set<std::string> seen;
    std::string line;
    std::size_t no = 0;
    while (std::getline(in, line)) {
        ++no;
        const auto text = trim(line);
        if (text.empty() || text.front() == '#') continue;
        const std::string where = origin + ":" + std::to_string(no);
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw InputError(where + ": expected key=value");
        Setting s{trim(std::string_view(text).substr(0, eq)), trim(std::string_view(text).substr(eq + 1)), where};
        if (!seen.insert(s.key).second) throw InputError(where + ": repeated key '" + s.key + "'");
        out.push_back(std::move(s));
    }
    return out;
}

RunConfig resolve_settings(std::span<const Setting> settings) {
    RunConfig cfg;
    auto apply = [&](const Setting& s) {
        try {
            apply_setting(cfg, s.key, s.value);
        } catch (const InputError& err) {
            throw InputError(s.where + ": " + err.what());
        }
    };
    for (const auto& s : settings)
        if (s.key == "profile") apply(s);
    for (const auto& s : settings)
        if (s.key != "profile") apply(s);
    cfg.train.validate();
    if (cfg.threads < 1) throw InputError("threads >= 1 required");
    return cfg;
}

RunConfig parse_run_config(std::istream& in, const std::string& origin) {
    const auto settings = read_settings(in, origin);
    try {
        return resolve_settings(settings);
    } catch (const InputError& err) {
        const std::string msg = err.what();
        if (msg.rfind(origin, 0) == 0) throw;
        throw InputError(origin + ": " + msg);
    }
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config '" + path.string() + "'");
    auto cfg = parse_run_config(in, path.string());
    for (const auto* p : {&cfg.train_path, &cfg.valid_path, &cfg.test_path, &cfg.meta_path})
        if (!p->empty() && !std::filesystem::exists(*p))
            throw InputError(path.string() + ": referenced file '" + p->string() + "' does not exist");
    return cfg;
}

std::string format_run_config(const RunConfig& cfg) {
    const auto& t = cfg.train;
    std::string out;
    auto put = [&out](const char* key, const std::string& value) { out += std::string(key) + "=" + value + "\n"; };
    if (!cfg.profile.empty()) put("profile", cfg.profile);
    put("k", std::to_string(t.k));
    put("gamma1", format_double(t.gamma1));
    put("gamma2", format_double(t.gamma2));
    put("lambda", format_double(t.lambda));
    put("alpha1", format_double(t.alpha1));
    put("alpha2", format_double(t.alpha2));
    put("batch_size", std::to_string(t.batch_size));
    put("norm", std::string(to_string(t.norm)));
    put("variant", std::string(to_string(t.variant)));
    put("seed", std::to_string(t.seed));
    put("max_epochs", std::to_string(t.max_epochs));
    put("patience", std::to_string(t.patience));
    put("threads", std::to_string(cfg.threads));
    auto path = [&put](const char* key, const std::filesystem::path& p) {
        if (!p.empty()) put(key, p.string());
    };
    path("train", cfg.train_path);
    path("valid", cfg.valid_path);
    path("test", cfg.test_path);
    path("meta", cfg.meta_path);
    path("checkpoint", cfg.checkpoint_path);
    path("report", cfg.report_path);
    path("log", cfg.log_path);
    return out;
}

} // namespace on2vec

#pragma once

#include "on2vec/params.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace on2vec {

struct RunConfig {
    std::string profile;
    TrainConfig train;
    std::filesystem::path train_path;
    std::filesystem::path valid_path;
    std::filesystem::path test_path;
    std::filesystem::path meta_path;
    std::filesystem::path checkpoint_path;
    std::filesystem::path report_path;
    std::filesystem::path log_path;
    int threads = 1;

    bool operator==(const RunConfig& o) const;
};

// Named presets: db3.6k, cn30k, yg15k, yg60k and desk (synthetic runs).
std::vector<std::string> profile_names();
void apply_profile(std::string_view name, TrainConfig& cfg);

// Sets one key. Keys: profile, k, gamma1, gamma2, lambda, alpha1, alpha2,
// batch_size, norm, variant, seed, max_epochs, patience, threads, train,
// valid, test, meta, checkpoint, report, log.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);

// One `key=value` assignment and where it came from (`file:line` or a flag
// name), used to prefix errors.
struct Setting {
    std::string key;
    std::string value;
    std::string where;
};

// Reads flat `key=value` lines, skipping `#` comments. Repeated keys are
// errors.
std::vector<Setting> read_settings(std::istream& in, const std::string& origin);

// The profile expands first wherever it appears; every other key then
// overrides it. Validates the result.
RunConfig resolve_settings(std::span<const Setting> settings);

RunConfig parse_run_config(std::istream& in, const std::string& origin);

// Parses and additionally checks that referenced input files exist.
RunConfig load_run_config(const std::filesystem::path& path);

std::string format_run_config(const RunConfig& cfg);

} // namespace on2vec

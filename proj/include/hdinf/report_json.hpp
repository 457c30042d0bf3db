#pragma once

#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "hdinf/simharness.hpp"

namespace hdinf {

using ordered_json = nlohmann::ordered_json;

// Parses a JSON document, rejecting duplicate object keys (a silent typo in a
// statistical config is wrong science).
ordered_json parse_json_strict(const std::string& text, const std::string& where);
ordered_json load_json_file(const std::string& path);

// Wraps a JSON object for strict consumption: reads record which keys were
// used, finish() rejects everything else by name.
class StrictConfigReader {
public:
    StrictConfigReader(const ordered_json& obj, std::string path);

    bool has(const std::string& key);
    const ordered_json& raw(const std::string& key);

    template <typename T>
    T get(const std::string& key, T fallback) {
        seen_.insert(key);
        if (!obj_.contains(key)) return fallback;
        try {
            return obj_.at(key).get<T>();
        } catch (const nlohmann::detail::exception& ex) {
            throw ConfigParseError(path_ + "." + key + ": " + ex.what());
        }
    }

    void finish() const;
    const std::string& path() const { return path_; }

private:
    const ordered_json& obj_;
    std::string path_;
    std::set<std::string> seen_;
};

ordered_json config_to_json(const ExperimentConfig& cfg);

// Strict reader: every key must be known, types must match. Defaults fill any
// absent keys. Throws ConfigParseError with key context.
ExperimentConfig experiment_config_from_json(const ordered_json& j);

struct ConfigKeyDoc {
    std::string key;
    std::string type;
    std::string default_value;
    std::string doc;
};

// One source of truth for --help and for unknown-key rejection.
const std::vector<ConfigKeyDoc>& experiment_config_keys();

ordered_json report_to_json(const MonteCarloReport& report);

// Report minus the volatile block (wall_ms, workers); byte-identical across
// reruns and across worker counts for a fixed config and master seed.
ordered_json canonical_report_json(const MonteCarloReport& report);
std::string canonical_report_string(const MonteCarloReport& report);

// Per-replicate records as CSV (grid experiments emit grid key/value columns).
void write_records_csv(const MonteCarloReport& report, const std::string& path);

} // namespace hdinf

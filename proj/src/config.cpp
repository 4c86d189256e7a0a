#include "dynamo/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dynamo/error.hpp"

namespace dynamo {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
    KeyValueConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              " is not 'key = value': " + line);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(lineno) + " has no key");
        cfg.entries_[key] = value;
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

bool KeyValueConfig::has(const std::string& key) const {
    return entries_.count(key) > 0;
}

std::string KeyValueConfig::get(const std::string& key, const std::string& fallback) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

std::string KeyValueConfig::require(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("missing required config key: " + key);
    return it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    try {
        std::size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + " is not a number: " + it->second);
    }
}

std::size_t KeyValueConfig::get_size(const std::string& key, std::size_t fallback) const {
    const auto v = get_int(key, static_cast<std::int64_t>(fallback));
    if (v < 0) throw ConfigError("config key " + key + " must be non-negative");
    return static_cast<std::size_t>(v);
}

std::int64_t KeyValueConfig::get_int(const std::string& key, std::int64_t fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    try {
        std::size_t pos = 0;
        const std::int64_t v = std::stoll(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key " + key + " is not an integer: " + it->second);
    }
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    const std::string& v = it->second;
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key " + key + " is not a boolean: " + v);
}

std::vector<std::string> KeyValueConfig::get_list(const std::string& key) const {
    std::vector<std::string> out;
    auto it = entries_.find(key);
    if (it == entries_.end()) return out;
    std::istringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<std::string> KeyValueConfig::keys_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    const std::string full = prefix + ".";
    for (const auto& [k, v] : entries_)
        if (k.rfind(full, 0) == 0) out.push_back(k.substr(full.size()));
    return out;
}

PipelineConfig PipelineConfig::defaults() { return PipelineConfig{}; }

namespace {

void load_channel_specs(const KeyValueConfig& kv, CsvSchema& schema) {
    std::vector<std::string> columns;
    for (const auto& sub : kv.keys_with_prefix("channel")) {
        const auto dot = sub.find('.');
        if (dot == std::string::npos) continue;
        const std::string column = sub.substr(0, dot);
        if (std::find(columns.begin(), columns.end(), column) == columns.end())
            columns.push_back(column);
    }
    for (const auto& column : columns) {
        ChannelSpec spec;
        spec.name = kv.get("channel." + column + ".name", column);
        spec.kind = channel_kind_from_string(
            kv.get("channel." + column + ".kind", "derived"));
        spec.phase = phase_from_string(kv.get("channel." + column + ".phase", "none"));
        spec.units = kv.get("channel." + column + ".units", "");
        schema.columns[column] = std::move(spec);
    }
}

}  // namespace

PipelineConfig pipeline_config_from(const KeyValueConfig& kv,
                                    const std::string& base_dir) {
    PipelineConfig cfg;

    cfg.io.schema.timestamp_column = kv.get("io.timestamp_column", "ts");
    const std::string delim = kv.get("io.delimiter", ",");
    if (delim.size() != 1) throw ConfigError("io.delimiter must be one character");
    cfg.io.schema.delimiter = delim[0];
    cfg.io.resample_interval = kv.get_double("io.resample_interval", 1.0);
    if (cfg.io.resample_interval < 0.0)
        throw ConfigError("io.resample_interval must be >= 0");
    cfg.io.fill_limit = kv.get_size("io.fill_limit", 10);

    if (kv.has("io.schema_path")) {
        std::filesystem::path p = kv.require("io.schema_path");
        if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
        if (!std::filesystem::exists(p))
            throw ConfigError("io.schema_path does not exist: " + p.string());
        load_channel_specs(KeyValueConfig::load(p.string()), cfg.io.schema);
    }
    load_channel_specs(kv, cfg.io.schema);

    if (kv.has("power_factor.voltage_angle") != kv.has("power_factor.current_angle"))
        throw ConfigError("power factor derivation needs both angle channels");
    if (kv.has("power_factor.voltage_angle")) {
        cfg.io.pf_voltage_angle = kv.require("power_factor.voltage_angle");
        cfg.io.pf_current_angle = kv.require("power_factor.current_angle");
        cfg.io.pf_output = kv.get("power_factor.output", "PF");
    }

    cfg.embedding.q = kv.get_size("embedding.q", 100);
    if (cfg.embedding.q < 2) throw ConfigError("embedding.q must be at least 2");
    cfg.embedding.tau = kv.get_size("embedding.tau", 1);
    if (cfg.embedding.tau < 1) throw ConfigError("embedding.tau must be at least 1");
    cfg.embedding.rank_policy =
        rank_policy_from_string(kv.get("embedding.rank_policy", "hard_threshold"));

    cfg.havok.sparsify_lambda = kv.get_double("havok.sparsify_lambda", 0.0);
    if (cfg.havok.sparsify_lambda < 0.0)
        throw ConfigError("havok.sparsify_lambda must be >= 0");

    cfg.detection.sigma_multiplier = kv.get_double("detection.sigma", 3.0);
    const std::string stats = kv.get("detection.stats", "global");
    if (stats == "global") {
        cfg.detection.rolling.reset();
    } else if (stats.rfind("rolling:", 0) == 0) {
        cfg.detection.rolling = RollingWindow{
            static_cast<std::size_t>(std::stoull(stats.substr(8)))};
    } else {
        throw ConfigError("detection.stats must be 'global' or 'rolling:N'");
    }
    cfg.detection.merge_gap = kv.get_size("detection.merge_gap", 5);
    cfg.detection.validate();

    cfg.sindy.library.polynomial_degree =
        static_cast<int>(kv.get_int("sindy.poly_degree", 3));
    if (cfg.sindy.library.polynomial_degree < 0)
        throw ConfigError("sindy.poly_degree must be >= 0");
    cfg.sindy.library.include_constant = kv.get_bool("sindy.include_constant", true);
    cfg.sindy.library.include_trig = kv.get_bool("sindy.include_trig", false);
    if (kv.has("sindy.trig_frequencies")) {
        cfg.sindy.library.trig_frequencies.clear();
        for (const auto& f : kv.get_list("sindy.trig_frequencies"))
            cfg.sindy.library.trig_frequencies.push_back(std::stod(f));
    }
    cfg.sindy.library.pairwise_trig_differences =
        kv.get_bool("sindy.pairwise_trig_differences", true);
    cfg.sindy.options.lambda = kv.get_double("sindy.lambda", 0.1);
    cfg.sindy.options.alpha = kv.get_double("sindy.alpha", 0.05);
    if (cfg.sindy.options.lambda < 0.0 || cfg.sindy.options.alpha < 0.0)
        throw ConfigError("sindy.lambda and sindy.alpha must be >= 0");
    cfg.sindy.options.max_iter = kv.get_size("sindy.max_iter", 25);
    cfg.sindy.options.standardize = kv.get_bool("sindy.standardize", true);
    cfg.sindy.horizon = kv.get_size("sindy.horizon", 0);

    cfg.channels = kv.get_list("channels");
    return cfg;
}

PipelineConfig load_pipeline_config(const std::string& path) {
    const auto kv = KeyValueConfig::load(path);
    return pipeline_config_from(kv,
                                std::filesystem::path(path).parent_path().string());
}

SynthConfig synth_config_from(const KeyValueConfig& kv) {
    SynthConfig cfg;
    cfg.n = kv.get_size("synth.n", cfg.n);
    cfg.noise_std = kv.get_double("synth.noise_std", cfg.noise_std);
    cfg.sample_interval = kv.get_double("synth.sample_interval", cfg.sample_interval);
    cfg.seed = static_cast<std::uint64_t>(kv.get_int("synth.seed", 42));

    auto load_profile = [&](const std::string& name, ChannelProfile& p) {
        p.base = kv.get_double("profile." + name + ".base", p.base);
        // components given as amplitude:period_s:phase triples
        if (kv.has("profile." + name + ".components")) {
            p.components.clear();
            for (const auto& comp : kv.get_list("profile." + name + ".components")) {
                std::istringstream ss(comp);
                std::string a, b, c;
                if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':'))
                    throw ConfigError("profile component must be amp:period[:phase]");
                std::getline(ss, c, ':');
                p.components.push_back(
                    {std::stod(a), std::stod(b), c.empty() ? 0.0 : std::stod(c)});
            }
        }
    };
    load_profile("voltage", cfg.profiles.voltage);
    load_profile("current", cfg.profiles.current);
    load_profile("power_factor", cfg.profiles.power_factor);

    std::vector<int> ids;
    for (const auto& sub : kv.keys_with_prefix("event")) {
        const auto dot = sub.find('.');
        if (dot == std::string::npos) continue;
        const int id = std::stoi(sub.substr(0, dot));
        if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
    }
    std::sort(ids.begin(), ids.end());
    for (int id : ids) {
        const std::string p = "event." + std::to_string(id) + ".";
        SynthEventSpec ev;
        ev.kind = synth_event_kind_from_string(kv.require(p + "kind"));
        ev.onset = kv.get_size(p + "onset", 0);
        ev.duration = kv.get_size(p + "duration", 60);
        ev.magnitude = kv.get_double(p + "magnitude", 0.02);
        cfg.events.push_back(ev);
    }
    return cfg;
}

SynthConfig load_synth_config(const std::string& path) {
    return synth_config_from(KeyValueConfig::load(path));
}

std::string describe(const SynthConfig& cfg) {
    std::ostringstream out;
    out << "synth.n = " << cfg.n << "\n";
    out << "synth.noise_std = " << cfg.noise_std << "\n";
    out << "synth.sample_interval = " << cfg.sample_interval << "\n";
    out << "synth.seed = " << cfg.seed << "\n";
    for (std::size_t i = 0; i < cfg.events.size(); ++i) {
        const auto& ev = cfg.events[i];
        out << "event." << i << ".kind = " << to_string(ev.kind) << "\n";
        out << "event." << i << ".onset = " << ev.onset << "\n";
        out << "event." << i << ".duration = " << ev.duration << "\n";
        out << "event." << i << ".magnitude = " << ev.magnitude << "\n";
    }
    return out.str();
}

}  // namespace dynamo

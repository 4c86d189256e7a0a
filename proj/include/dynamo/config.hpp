#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dynamo/anomaly.hpp"
#include "dynamo/embedding.hpp"
#include "dynamo/sindy.hpp"
#include "dynamo/synth.hpp"
#include "dynamo/timeseries.hpp"

namespace dynamo {

// Flat dotted-key configuration text: `section.key = value` lines, '#'
// comments, blank lines ignored. Keys are unique; later duplicates win.
class KeyValueConfig {
  public:
    static KeyValueConfig parse(const std::string& text);
    static KeyValueConfig load(const std::string& path);

    bool has(const std::string& key) const;
    std::string get(const std::string& key, const std::string& fallback) const;
    std::string require(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    std::size_t get_size(const std::string& key, std::size_t fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::string> get_list(const std::string& key) const;

    // keys below a dotted prefix, e.g. prefix "channel" yields "V.kind"...
    std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

    const std::map<std::string, std::string>& entries() const { return entries_; }

  private:
    std::map<std::string, std::string> entries_;
};

struct IoConfig {
    CsvSchema schema;
    double resample_interval = 1.0;  // seconds, 0 disables resampling
    std::size_t fill_limit = 10;
    // optional power-factor derivation from two angle columns
    std::optional<std::string> pf_voltage_angle;
    std::optional<std::string> pf_current_angle;
    std::string pf_output = "PF";
};

struct EmbeddingConfig {
    std::size_t q = 100;
    std::size_t tau = 1;
    RankPolicy rank_policy = RankHardThreshold{};
};

struct HavokConfig {
    double sparsify_lambda = 0.0;
};

struct SindyConfig {
    LibrarySpec library;
    FitOptions options;
    std::size_t horizon = 0;
};

struct PipelineConfig {
    IoConfig io;
    EmbeddingConfig embedding;
    HavokConfig havok;
    DetectionConfig detection;
    SindyConfig sindy;
    std::vector<std::string> channels;  // empty -> all non-angle channels

    static PipelineConfig defaults();
};

// Parses and validates; referenced paths (io.schema_path) must exist.
// Numeric bounds from the module invariants are enforced here.
PipelineConfig load_pipeline_config(const std::string& path);
PipelineConfig pipeline_config_from(const KeyValueConfig& kv,
                                    const std::string& base_dir = "");

struct SynthConfig {
    std::size_t n = 100000;
    double noise_std = 0.01;
    double sample_interval = 1.0;
    std::uint64_t seed = 42;
    SynthProfiles profiles = SynthProfiles::defaults();
    std::vector<SynthEventSpec> events;
};

SynthConfig load_synth_config(const std::string& path);
SynthConfig synth_config_from(const KeyValueConfig& kv);
std::string describe(const SynthConfig& cfg);  // effective spec, printable

}  // namespace dynamo

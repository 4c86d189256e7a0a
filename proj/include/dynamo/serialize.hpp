#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "dynamo/anomaly.hpp"
#include "dynamo/embedding.hpp"
#include "dynamo/havok.hpp"
#include "dynamo/metrics.hpp"
#include "dynamo/sindy.hpp"

namespace dynamo {

// Binary SVD artifact. Layout (little-endian, 64-bit floats, row-major):
//   magic "DPMUSVD1", u64 q, u64 p, u64 tau, f64 dt, u64 m, u8 flags
//   (bit0 = V stored, bit1 = timestamps stored), then U (q*m), S (m),
//   optionally V (p*m) and i64 origin timestamps (p).
// Detection artifacts drop V: the projector only needs U and S.
void save_svd_factors(const SvdFactors& f, const std::string& path,
                      bool include_v = false);
SvdFactors load_svd_factors(const std::string& path);

std::string havok_model_json(const HavokModel& m);
HavokModel havok_model_from_json(const std::string& text);

std::string sindy_model_json(const SindyModel& m);
SindyModel sindy_model_from_json(const std::string& text);

std::string detection_report_json(const DetectionReport& r);
std::string regression_report_json(const RegressionReport& r);

void write_events_csv(const std::vector<AnomalyEvent>& events, std::ostream& out);
void write_events_jsonl(const std::vector<AnomalyEvent>& events, std::ostream& out);

// 64-bit FNV-1a, hex-encoded; stable content identity for the manifest.
std::string fnv1a_hex(std::string_view bytes);
std::string hash_file(const std::string& path);

struct Manifest {
    std::string tool_version;
    std::string config_hash;
    std::string input_hash;
    std::string created_at;  // ISO-8601; excluded from identity
};

std::string manifest_json(const Manifest& m);

// Write-to-temp-then-rename so partial runs never leave a truncated file.
void atomic_write(const std::string& path,
                  const std::function<void(std::ostream&)>& writer);

}  // namespace dynamo

#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "dynamo/time.hpp"

namespace dynamo {

enum class ChannelKind {
    voltage_magnitude,
    current_magnitude,
    voltage_angle,
    current_angle,
    power_factor,
    derived,
};

enum class Phase { A, B, C, none };

ChannelKind channel_kind_from_string(const std::string& s);
std::string to_string(ChannelKind k);
Phase phase_from_string(const std::string& s);
std::string to_string(Phase p);

struct ChannelSpec {
    std::string name;
    ChannelKind kind = ChannelKind::derived;
    Phase phase = Phase::none;
    std::string units;
};

bool is_angle_kind(ChannelKind k);

// Column layout of a measurement file: which column holds the timestamp,
// the field delimiter, and the mapping from column name to channel.
// Columns without a mapping are ignored on parse.
struct CsvSchema {
    std::string timestamp_column = "ts";
    char delimiter = ',';
    std::map<std::string, ChannelSpec> columns;
};

// Timestamped multi-channel table. Missing cells are NaN. Channel order is
// the insertion order (deterministic serialization).
class MeasurementFrame {
  public:
    MeasurementFrame() = default;
    MeasurementFrame(std::vector<Timestamp> timestamps,
                     std::vector<std::string> names,
                     std::vector<std::vector<double>> columns);

    std::size_t size() const { return timestamps_.size(); }
    std::size_t channel_count() const { return names_.size(); }
    const std::vector<Timestamp>& timestamps() const { return timestamps_; }
    const std::vector<std::string>& channel_names() const { return names_; }
    bool has_channel(const std::string& name) const;
    const std::vector<double>& column(const std::string& name) const;

    // Uniform sampling interval in seconds; 0 when the spacing is not
    // uniform (raw files before resampling).
    double sample_interval() const { return sample_interval_; }
    void set_sample_interval(double s) { sample_interval_ = s; }

    void add_channel(const std::string& name, std::vector<double> values);

  private:
    std::vector<Timestamp> timestamps_;
    std::vector<std::string> names_;
    std::vector<std::vector<double>> columns_;
    double sample_interval_ = 0.0;
};

struct Series {
    std::vector<Timestamp> timestamps;
    std::vector<double> values;
};

// Parse delimiter-separated text with a header row. Rows whose timestamp
// does not parse are dropped; blank or non-numeric value cells become NaN.
// Throws MissingTimestampColumn, NonMonotoneTimestamps, EmptyInput.
MeasurementFrame parse_pmu_csv(std::istream& source, const CsvSchema& schema);
MeasurementFrame parse_pmu_csv_file(const std::string& path, const CsvSchema& schema);

// Bucket by floor(timestamp / interval), aggregate present samples by
// arithmetic mean, forward-fill empty buckets up to fill_limit consecutive
// ones. Throws GapTooLarge beyond that.
MeasurementFrame resample(const MeasurementFrame& frame, double interval_s,
                          std::size_t fill_limit);

// cos of the wrapped (voltage - current) angle difference, degrees in.
std::vector<double> compute_power_factor(const std::vector<double>& v_angle_deg,
                                         const std::vector<double>& i_angle_deg);

// Column plus aligned timestamps; interior missing cells are linearly
// interpolated, edge runs take the nearest present value.
Series select_channel(const MeasurementFrame& frame, const std::string& name);

// Same dialect the parser reads: header row, ISO-8601 ns timestamps,
// shortest round-trip doubles, NaN as empty field.
void serialize_csv(const MeasurementFrame& frame, std::ostream& out,
                   char delimiter = ',');
void serialize_csv_file(const MeasurementFrame& frame, const std::string& path,
                        char delimiter = ',');

}  // namespace dynamo

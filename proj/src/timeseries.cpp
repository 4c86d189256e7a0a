#include "dynamo/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "dynamo/error.hpp"
#include "dynamo/kernels.hpp"

namespace dynamo {

ChannelKind channel_kind_from_string(const std::string& s) {
    if (s == "voltage_magnitude") return ChannelKind::voltage_magnitude;
    if (s == "current_magnitude") return ChannelKind::current_magnitude;
    if (s == "voltage_angle") return ChannelKind::voltage_angle;
    if (s == "current_angle") return ChannelKind::current_angle;
    if (s == "power_factor") return ChannelKind::power_factor;
    if (s == "derived") return ChannelKind::derived;
    throw ConfigError("unknown channel kind: " + s);
}

std::string to_string(ChannelKind k) {
    switch (k) {
        case ChannelKind::voltage_magnitude: return "voltage_magnitude";
        case ChannelKind::current_magnitude: return "current_magnitude";
        case ChannelKind::voltage_angle: return "voltage_angle";
        case ChannelKind::current_angle: return "current_angle";
        case ChannelKind::power_factor: return "power_factor";
        case ChannelKind::derived: return "derived";
    }
    return "derived";
}

Phase phase_from_string(const std::string& s) {
    if (s == "A" || s == "a") return Phase::A;
    if (s == "B" || s == "b") return Phase::B;
    if (s == "C" || s == "c") return Phase::C;
    if (s == "none" || s.empty()) return Phase::none;
    throw ConfigError("unknown phase: " + s);
}

std::string to_string(Phase p) {
    switch (p) {
        case Phase::A: return "A";
        case Phase::B: return "B";
        case Phase::C: return "C";
        case Phase::none: return "none";
    }
    return "none";
}

bool is_angle_kind(ChannelKind k) {
    return k == ChannelKind::voltage_angle || k == ChannelKind::current_angle;
}

namespace {

double wrap_angle_deg(double d) {
    double r = std::fmod(d, 360.0);
    if (r < -180.0) r += 360.0;
    if (r >= 180.0) r -= 360.0;
    return r;
}

}  // namespace

MeasurementFrame::MeasurementFrame(std::vector<Timestamp> timestamps,
                                   std::vector<std::string> names,
                                   std::vector<std::vector<double>> columns)
    : timestamps_(std::move(timestamps)),
      names_(std::move(names)),
      columns_(std::move(columns)) {
    for (const auto& col : columns_)
        if (col.size() != timestamps_.size())
            throw DataError("channel column length differs from timestamps");
    for (std::size_t i = 1; i < timestamps_.size(); ++i)
        if (timestamps_[i] <= timestamps_[i - 1])
            throw NonMonotoneTimestamps("timestamps not strictly increasing", i + 1);
}

bool MeasurementFrame::has_channel(const std::string& name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
}

const std::vector<double>& MeasurementFrame::column(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return columns_[i];
    throw UnknownChannel("unknown channel: " + name);
}

void MeasurementFrame::add_channel(const std::string& name, std::vector<double> values) {
    if (values.size() != timestamps_.size())
        throw LengthMismatch("channel length differs from frame length");
    if (has_channel(name)) throw DataError("duplicate channel: " + name);
    names_.push_back(name);
    columns_.push_back(std::move(values));
}

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(delim, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r')
        out.back().pop_back();
    return out;
}

}  // namespace

MeasurementFrame parse_pmu_csv(std::istream& source, const CsvSchema& schema) {
    std::string line;
    // header
    if (!std::getline(source, line)) throw EmptyInput("input has no header row");
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
        static_cast<unsigned char>(line[1]) == 0xBB &&
        static_cast<unsigned char>(line[2]) == 0xBF)
        line.erase(0, 3);  // UTF-8 BOM

    const auto header = split_line(line, schema.delimiter);
    std::size_t ts_col = header.size();
    std::vector<std::pair<std::size_t, ChannelSpec>> mapped;  // column idx -> spec
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == schema.timestamp_column) {
            ts_col = i;
            continue;
        }
        auto it = schema.columns.find(header[i]);
        if (it != schema.columns.end()) {
            ChannelSpec spec = it->second;
            if (spec.name.empty()) spec.name = header[i];
            mapped.emplace_back(i, std::move(spec));
        }
    }
    if (ts_col == header.size())
        throw MissingTimestampColumn("timestamp column '" + schema.timestamp_column +
                                     "' not found in header");

    std::vector<Timestamp> timestamps;
    std::vector<std::vector<double>> columns(mapped.size());
    std::size_t data_row = 0;
    while (std::getline(source, line)) {
        if (line.empty() || line == "\r") continue;
        ++data_row;
        const auto fields = split_line(line, schema.delimiter);
        if (ts_col >= fields.size()) continue;  // short row, no timestamp
        const auto ts = parse_timestamp(fields[ts_col]);
        if (!ts) continue;  // unparseable timestamp: row rejected
        if (!timestamps.empty() && *ts <= timestamps.back())
            throw NonMonotoneTimestamps("timestamps not strictly increasing at row " +
                                            std::to_string(data_row),
                                        data_row);
        timestamps.push_back(*ts);
        for (std::size_t c = 0; c < mapped.size(); ++c) {
            const std::size_t idx = mapped[c].first;
            double v = std::numeric_limits<double>::quiet_NaN();
            if (idx < fields.size())
                if (auto parsed = parse_value(fields[idx])) v = *parsed;
            if (is_angle_kind(mapped[c].second.kind) && std::isfinite(v))
                v = wrap_angle_deg(v);
            columns[c].push_back(v);
        }
    }
    if (timestamps.empty()) throw EmptyInput("no parseable data rows");

    std::vector<std::string> names;
    names.reserve(mapped.size());
    for (const auto& [idx, spec] : mapped) names.push_back(spec.name);

    MeasurementFrame frame(std::move(timestamps), std::move(names), std::move(columns));

    // record the spacing when it is uniform within a microsecond
    if (frame.size() >= 2) {
        const auto& ts = frame.timestamps();
        const Timestamp dt0 = ts[1] - ts[0];
        bool uniform = true;
        for (std::size_t i = 2; i < ts.size() && uniform; ++i)
            uniform = std::llabs((ts[i] - ts[i - 1]) - dt0) <= 1000;
        if (uniform) frame.set_sample_interval(static_cast<double>(dt0) / kNanosPerSecond);
    }
    return frame;
}

MeasurementFrame parse_pmu_csv_file(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open input file: " + path);
    return parse_pmu_csv(in, schema);
}

MeasurementFrame resample(const MeasurementFrame& frame, double interval_s,
                          std::size_t fill_limit) {
    if (interval_s <= 0.0) throw ConfigError("resample interval must be positive");
    if (frame.size() == 0) throw EmptyInput("cannot resample an empty frame");

    const auto interval_ns =
        static_cast<Timestamp>(std::llround(interval_s * kNanosPerSecond));
    const auto& ts = frame.timestamps();

    auto bucket_of = [interval_ns](Timestamp t) {
        Timestamp b = t / interval_ns;
        if (t < 0 && t % interval_ns != 0) --b;  // floor toward -inf
        return b;
    };

    const Timestamp first_bucket = bucket_of(ts.front());
    const Timestamp last_bucket = bucket_of(ts.back());
    const std::size_t n_buckets = static_cast<std::size_t>(last_bucket - first_bucket) + 1;

    std::vector<Timestamp> out_ts(n_buckets);
    for (std::size_t b = 0; b < n_buckets; ++b)
        out_ts[b] = (first_bucket + static_cast<Timestamp>(b)) * interval_ns;

    const std::size_t n_cols = frame.channel_names().size();
    std::vector<std::vector<double>> out_cols(n_cols,
                                              std::vector<double>(n_buckets, 0.0));

    std::vector<std::vector<double>> sums(n_cols, std::vector<double>(n_buckets, 0.0));
    std::vector<std::vector<std::size_t>> counts(
        n_cols, std::vector<std::size_t>(n_buckets, 0));
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const auto b = static_cast<std::size_t>(bucket_of(ts[i]) - first_bucket);
        for (std::size_t c = 0; c < n_cols; ++c) {
            const double v = frame.column(frame.channel_names()[c])[i];
            if (std::isfinite(v)) {
                sums[c][b] += v;
                counts[c][b] += 1;
            }
        }
    }

    for (std::size_t c = 0; c < n_cols; ++c) {
        std::size_t empty_run = 0;
        for (std::size_t b = 0; b < n_buckets; ++b) {
            if (counts[c][b] > 0) {
                out_cols[c][b] = sums[c][b] / static_cast<double>(counts[c][b]);
                empty_run = 0;
            } else {
                ++empty_run;
                if (empty_run > fill_limit)
                    throw GapTooLarge(
                        "gap of " + std::to_string(empty_run) + "+ empty buckets at " +
                        format_timestamp(out_ts[b]) + " exceeds fill limit " +
                        std::to_string(fill_limit));
                out_cols[c][b] = b > 0 ? out_cols[c][b - 1]
                                       : std::numeric_limits<double>::quiet_NaN();
            }
        }
    }

    std::vector<std::string> names = frame.channel_names();
    MeasurementFrame out(std::move(out_ts), std::move(names), std::move(out_cols));
    out.set_sample_interval(interval_s);
    return out;
}

std::vector<double> compute_power_factor(const std::vector<double>& v_angle_deg,
                                         const std::vector<double>& i_angle_deg) {
    if (v_angle_deg.size() != i_angle_deg.size())
        throw LengthMismatch("angle series lengths differ: " +
                             std::to_string(v_angle_deg.size()) + " vs " +
                             std::to_string(i_angle_deg.size()));
    std::vector<double> out(v_angle_deg.size());
    kernels::power_factor(v_angle_deg, i_angle_deg, out);
    return out;
}

Series select_channel(const MeasurementFrame& frame, const std::string& name) {
    Series s;
    s.timestamps = frame.timestamps();
    s.values = frame.column(name);

    // linear interpolation across interior NaN runs, nearest value at edges
    const std::size_t n = s.values.size();
    std::size_t i = 0;
    while (i < n) {
        if (std::isfinite(s.values[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && !std::isfinite(s.values[j])) ++j;
        const bool has_left = i > 0;
        const bool has_right = j < n;
        for (std::size_t k = i; k < j; ++k) {
            if (has_left && has_right) {
                const double t0 = static_cast<double>(s.timestamps[i - 1]);
                const double t1 = static_cast<double>(s.timestamps[j]);
                const double w = (static_cast<double>(s.timestamps[k]) - t0) / (t1 - t0);
                s.values[k] = s.values[i - 1] * (1.0 - w) + s.values[j] * w;
            } else if (has_left) {
                s.values[k] = s.values[i - 1];
            } else if (has_right) {
                s.values[k] = s.values[j];
            }
        }
        i = j;
    }
    return s;
}

void serialize_csv(const MeasurementFrame& frame, std::ostream& out, char delimiter) {
    out << "ts";
    for (const auto& name : frame.channel_names()) out << delimiter << name;
    out << '\n';
    const auto& ts = frame.timestamps();
    for (std::size_t i = 0; i < frame.size(); ++i) {
        out << format_timestamp(ts[i]);
        for (const auto& name : frame.channel_names())
            out << delimiter << format_value(frame.column(name)[i]);
        out << '\n';
    }
}

void serialize_csv_file(const MeasurementFrame& frame, const std::string& path,
                        char delimiter) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open output file: " + path);
    serialize_csv(frame, out, delimiter);
}

}  // namespace dynamo

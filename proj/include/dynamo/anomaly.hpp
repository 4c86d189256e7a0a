#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "dynamo/havok.hpp"
#include "dynamo/time.hpp"

namespace dynamo {

struct AnomalyEvent {
    Timestamp start = 0;
    Timestamp end = 0;
    double peak_forcing = 0.0;  // raw forcing value at the peak deviation
    std::size_t peak_index = 0;
    std::string channel;
};

struct RollingWindow {
    std::size_t window = 0;
};

struct DetectionConfig {
    double sigma_multiplier = 3.0;
    // empty -> global statistics; otherwise trailing rolling window, the
    // current sample excluded from its own statistics
    std::optional<RollingWindow> rolling;
    std::size_t merge_gap = 5;

    void validate() const;
};

// flag[i] = |v[i] - mu| > k*sigma with population statistics; sigma = 0
// yields no flags. Throws WindowTooLarge when a rolling window exceeds
// the series length.
std::vector<std::uint8_t> three_sigma_flags(const ForcingSignal& f,
                                            const DetectionConfig& cfg);

// Maximal flagged runs, with runs separated by <= merge_gap unflagged
// samples coalesced. Peak is the largest |value - mean| inside the event.
std::vector<AnomalyEvent> merge_events(const std::vector<std::uint8_t>& flags,
                                       const std::vector<Timestamp>& timestamps,
                                       const std::vector<double>& forcing,
                                       const DetectionConfig& cfg,
                                       const std::string& channel);

// Normalized deviation score in [0, 1]; all-equal input scores 0.
std::vector<double> anomaly_score(const ForcingSignal& f);

// Incremental sample statistics of a trailing window. Shared by the batch
// rolling path and the streaming detector so both run the exact same
// arithmetic (chunked and batch flags must agree bitwise).
class RollingStats {
  public:
    explicit RollingStats(std::size_t window) : window_(window) {}

    void push(double x);
    std::size_t count() const { return buf_.size(); }
    double mean() const;
    double std() const;  // population

  private:
    std::size_t window_;
    std::deque<double> buf_;
    double sum_ = 0.0;
    double sum_sq_ = 0.0;
};

// Streaming entry point: feed raw measurement samples in arbitrary chunks
// and collect per-window forcing values and rolling three-sigma flags.
// Output is identical to the batch rolling pipeline on the same series.
class StreamingDetector {
  public:
    struct Emission {
        std::size_t index;  // window index (tail sample index - (q-1)*tau)
        double forcing;
        bool flag;
    };

    StreamingDetector(ForcingProjector projector, DetectionConfig cfg);

    std::vector<Emission> push(double sample);
    std::vector<Emission> push_chunk(std::span<const double> samples);

  private:
    ForcingProjector projector_;
    DetectionConfig cfg_;
    RollingStats stats_;
    std::vector<double> ring_;
    std::vector<double> scratch_;
    std::size_t seen_ = 0;
    std::size_t emitted_ = 0;
};

}  // namespace dynamo

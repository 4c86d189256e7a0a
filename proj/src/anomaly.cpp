#include "dynamo/anomaly.hpp"

#include <cmath>

#include "dynamo/error.hpp"
#include "dynamo/kernels.hpp"

namespace dynamo {

void DetectionConfig::validate() const {
    if (!(sigma_multiplier > 0.0))
        throw ConfigError("sigma multiplier must be positive");
    if (rolling && rolling->window < 2)
        throw ConfigError("rolling window must hold at least 2 samples");
}

void RollingStats::push(double x) {
    buf_.push_back(x);
    sum_ += x;
    sum_sq_ += x * x;
    if (buf_.size() > window_) {
        const double old = buf_.front();
        buf_.pop_front();
        sum_ -= old;
        sum_sq_ -= old * old;
    }
}

double RollingStats::mean() const {
    return buf_.empty() ? 0.0 : sum_ / static_cast<double>(buf_.size());
}

double RollingStats::std() const {
    if (buf_.empty()) return 0.0;
    const double n = static_cast<double>(buf_.size());
    const double m = sum_ / n;
    const double var = sum_sq_ / n - m * m;
    return var > 0.0 ? std::sqrt(var) : 0.0;
}

namespace {

std::vector<std::uint8_t> rolling_flags(const std::vector<double>& values,
                                        const DetectionConfig& cfg) {
    RollingStats stats(cfg.rolling->window);
    std::vector<std::uint8_t> flags(values.size(), 0);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (stats.count() >= 2) {
            const double sigma = stats.std();
            if (sigma > 0.0 &&
                std::fabs(values[i] - stats.mean()) > cfg.sigma_multiplier * sigma)
                flags[i] = 1;
        }
        stats.push(values[i]);
    }
    return flags;
}

}  // namespace

std::vector<std::uint8_t> three_sigma_flags(const ForcingSignal& f,
                                            const DetectionConfig& cfg) {
    cfg.validate();
    if (f.values.size() < 2)
        throw TooFewPoints("need at least 2 forcing samples to flag");
    if (cfg.rolling) {
        if (cfg.rolling->window > f.values.size())
            throw WindowTooLarge("rolling window " + std::to_string(cfg.rolling->window) +
                                 " exceeds series length " +
                                 std::to_string(f.values.size()));
        return rolling_flags(f.values, cfg);
    }
    std::vector<std::uint8_t> flags(f.values.size(), 0);
    if (f.std > 0.0)
        kernels::deviation_flags(f.values, f.mean, f.std, cfg.sigma_multiplier, flags);
    return flags;
}

std::vector<AnomalyEvent> merge_events(const std::vector<std::uint8_t>& flags,
                                       const std::vector<Timestamp>& timestamps,
                                       const std::vector<double>& forcing,
                                       const DetectionConfig& cfg,
                                       const std::string& channel) {
    if (flags.size() != timestamps.size() || flags.size() != forcing.size())
        throw LengthMismatch("flags, timestamps and forcing lengths differ");
    const double mu = kernels::mean_std(forcing).mean;

    std::vector<AnomalyEvent> events;
    std::size_t i = 0;
    const std::size_t n = flags.size();
    while (i < n) {
        if (!flags[i]) {
            ++i;
            continue;
        }
        std::size_t begin = i;
        std::size_t end = i;  // inclusive index of the last flagged sample
        std::size_t j = i + 1;
        std::size_t gap = 0;
        while (j < n) {
            if (flags[j]) {
                end = j;
                gap = 0;
            } else if (++gap > cfg.merge_gap) {
                break;
            }
            ++j;
        }
        AnomalyEvent ev;
        ev.channel = channel;
        ev.start = timestamps[begin];
        ev.end = timestamps[end];
        ev.peak_index = begin;
        double peak_dev = -1.0;
        for (std::size_t k = begin; k <= end; ++k) {
            const double dev = std::fabs(forcing[k] - mu);
            if (dev > peak_dev) {
                peak_dev = dev;
                ev.peak_index = k;
            }
        }
        ev.peak_forcing = forcing[ev.peak_index];
        events.push_back(std::move(ev));
        i = end + 1;
    }
    return events;
}

std::vector<double> anomaly_score(const ForcingSignal& f) {
    if (f.values.size() < 2)
        throw TooFewPoints("need at least 2 forcing samples to score");
    const double mu = f.mean;
    const double max_dev = kernels::max_abs_dev(f.values, mu);
    std::vector<double> scores(f.values.size(), 0.0);
    if (max_dev <= 0.0) return scores;
    for (std::size_t i = 0; i < f.values.size(); ++i)
        scores[i] = std::fabs(f.values[i] - mu) / max_dev;
    return scores;
}

StreamingDetector::StreamingDetector(ForcingProjector projector, DetectionConfig cfg)
    : projector_(std::move(projector)),
      cfg_(std::move(cfg)),
      stats_(cfg_.rolling ? cfg_.rolling->window : 0),
      scratch_(projector_.window()) {
    cfg_.validate();
    if (!cfg_.rolling)
        throw ConfigError("streaming detection requires rolling statistics");
}

std::vector<StreamingDetector::Emission> StreamingDetector::push(double sample) {
    ring_.push_back(sample);
    ++seen_;
    std::vector<Emission> out;
    // one emission per complete delay window
    const std::size_t q = projector_.window();
    const std::size_t span = (q - 1) * projector_.tau() + 1;
    if (ring_.size() < span) return out;

    const std::size_t base = ring_.size() - span;
    for (std::size_t i = 0; i < q; ++i)
        scratch_[i] = ring_[base + i * projector_.tau()];
    const double forcing = projector_.project_window(scratch_);

    Emission e;
    e.index = emitted_;
    e.forcing = forcing;
    e.flag = false;
    if (stats_.count() >= 2) {
        const double sigma = stats_.std();
        if (sigma > 0.0 &&
            std::fabs(forcing - stats_.mean()) > cfg_.sigma_multiplier * sigma)
            e.flag = true;
    }
    stats_.push(forcing);
    ++emitted_;
    out.push_back(e);

    if (ring_.size() > 4 * span) ring_.erase(ring_.begin(), ring_.end() - span);
    return out;
}

std::vector<StreamingDetector::Emission> StreamingDetector::push_chunk(
    std::span<const double> samples) {
    std::vector<Emission> out;
    for (double s : samples) {
        auto e = push(s);
        out.insert(out.end(), e.begin(), e.end());
    }
    return out;
}

}  // namespace dynamo

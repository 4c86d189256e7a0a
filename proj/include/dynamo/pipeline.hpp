#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dynamo/anomaly.hpp"
#include "dynamo/config.hpp"
#include "dynamo/embedding.hpp"
#include "dynamo/havok.hpp"
#include "dynamo/metrics.hpp"
#include "dynamo/sindy.hpp"
#include "dynamo/timeseries.hpp"

namespace dynamo {

// Detection output for one channel. Forcing samples are stamped with the
// newest measurement of their delay window; flags_full re-aligns them to
// the input frame (leading q-1 samples cannot be flagged).
struct ChannelDetection {
    std::string channel;
    SvdFactors factors;
    std::size_t rank = 0;
    HavokModel model;
    std::vector<double> forcing;
    std::vector<Timestamp> forcing_timestamps;
    std::vector<std::uint8_t> flags;          // aligned to forcing
    std::vector<double> scores;               // normalized |dev|, aligned to forcing
    std::vector<std::uint8_t> flags_full;     // aligned to the input frame
    std::vector<AnomalyEvent> events;
};

struct DetectResult {
    std::vector<ChannelDetection> channels;
    std::vector<std::uint8_t> any_flags;  // frame-aligned union over channels
    MeasurementFrame frame;               // the (resampled, derived) frame used
};

// Channel selection, optional resampling and power-factor derivation,
// then per channel: Hankel -> SVD -> rank -> forced linear fit -> forcing
// -> three-sigma flags -> merged events. Rolling mode runs through the
// streaming detector so chunked and batch flags agree bitwise.
DetectResult run_detect(const MeasurementFrame& input, const PipelineConfig& cfg);

struct ChannelPrediction {
    std::string channel;
    SindyModel model;
    std::vector<double> predicted;
    std::vector<double> actual;  // empty when no held-out data exists
    RegressionReport report;
    bool has_report = false;
    bool diverged = false;
};

struct PredictResult {
    std::vector<ChannelPrediction> channels;
    MeasurementFrame predicted_frame;
    std::vector<AnomalyEvent> predicted_events;
    bool any_diverged = false;
};

// Fits eigen-coordinate dynamics on the first train_count samples and
// simulates the rest; when the horizon covers held-out samples the
// regression report compares against them.
PredictResult run_predict(const MeasurementFrame& input, const PipelineConfig& cfg,
                          std::size_t train_count, std::size_t horizon);

// Horizon steps beyond the end of the training frame, then the detection
// pipeline over the predictions (no held-out comparison).
PredictResult predict_and_detect(const MeasurementFrame& train,
                                 const PipelineConfig& cfg, std::size_t horizon);

// Applies io settings: resample when configured and derive the power
// factor channel when both angle channels are named.
MeasurementFrame prepare_frame(const MeasurementFrame& input, const PipelineConfig& cfg);

// Channels to analyze: the configured list, or all magnitude/pf/derived
// channels when the list is empty.
std::vector<std::string> effective_channels(const MeasurementFrame& frame,
                                            const PipelineConfig& cfg);

}  // namespace dynamo

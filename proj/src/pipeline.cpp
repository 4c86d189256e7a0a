#include "dynamo/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "dynamo/error.hpp"

namespace dynamo {

MeasurementFrame prepare_frame(const MeasurementFrame& input, const PipelineConfig& cfg) {
    MeasurementFrame frame = input;

    if (cfg.io.pf_voltage_angle && !frame.has_channel(cfg.io.pf_output)) {
        const auto& va = frame.column(*cfg.io.pf_voltage_angle);
        const auto& ia = frame.column(*cfg.io.pf_current_angle);
        frame.add_channel(cfg.io.pf_output, compute_power_factor(va, ia));
    }

    if (cfg.io.resample_interval > 0.0 &&
        frame.sample_interval() != cfg.io.resample_interval)
        frame = resample(frame, cfg.io.resample_interval, cfg.io.fill_limit);

    return frame;
}

std::vector<std::string> effective_channels(const MeasurementFrame& frame,
                                            const PipelineConfig& cfg) {
    if (!cfg.channels.empty()) {
        for (const auto& name : cfg.channels)
            if (!frame.has_channel(name))
                throw UnknownChannel("configured channel not in input: " + name);
        return cfg.channels;
    }
    // all channels except angles (angles feed the power factor instead)
    std::vector<std::string> out;
    for (const auto& name : frame.channel_names()) {
        bool is_angle = false;
        for (const auto& [column, spec] : cfg.io.schema.columns)
            if (spec.name == name && is_angle_kind(spec.kind)) is_angle = true;
        if (!is_angle) out.push_back(name);
    }
    return out;
}

namespace {

ChannelDetection detect_channel(const Series& series, const std::string& name,
                                const PipelineConfig& cfg, double dt) {
    ChannelDetection det;
    det.channel = name;

    const auto hankel = build_hankel(series.values, cfg.embedding.q, cfg.embedding.tau,
                                     dt, series.timestamps);
    det.factors = svd_hankel(hankel);
    det.rank = choose_rank(det.factors, cfg.embedding.rank_policy);
    const auto coords = delay_coordinates(det.factors, det.rank);

    const auto deriv = estimate_derivatives(coords);
    det.model = sparsify(fit_forced_linear(coords, deriv), cfg.havok.sparsify_lambda);

    if (cfg.detection.rolling) {
        // the streaming path is canonical here: chunked replays match bitwise
        StreamingDetector stream(ForcingProjector(det.factors, det.rank),
                                 cfg.detection);
        const auto emissions = stream.push_chunk(series.values);
        det.forcing.reserve(emissions.size());
        det.flags.reserve(emissions.size());
        for (const auto& e : emissions) {
            det.forcing.push_back(e.forcing);
            det.flags.push_back(e.flag ? 1 : 0);
        }
        det.forcing_timestamps = coords.timestamps;
        det.scores = anomaly_score(ForcingSignal(det.forcing, det.forcing_timestamps));
    } else {
        const auto fs = forcing_signal(coords);
        det.flags = three_sigma_flags(fs, cfg.detection);
        det.scores = anomaly_score(fs);
        det.forcing = fs.values;
        det.forcing_timestamps = fs.timestamps;
    }

    det.events = merge_events(det.flags, det.forcing_timestamps, det.forcing,
                              cfg.detection, name);
    return det;
}

}  // namespace

DetectResult run_detect(const MeasurementFrame& input, const PipelineConfig& cfg) {
    DetectResult result;
    result.frame = prepare_frame(input, cfg);
    const double dt = result.frame.sample_interval();
    if (dt <= 0.0)
        throw DataError("series is not uniformly sampled; set io.resample_interval");

    const auto names = effective_channels(result.frame, cfg);
    if (names.empty()) throw DataError("no channels to analyze");

    const std::size_t n = result.frame.size();
    const std::size_t offset = (cfg.embedding.q - 1) * cfg.embedding.tau;
    result.any_flags.assign(n, 0);

    for (const auto& name : names) {
        const auto series = select_channel(result.frame, name);
        auto det = detect_channel(series, name, cfg, dt);

        det.flags_full.assign(n, 0);
        for (std::size_t j = 0; j < det.flags.size(); ++j)
            det.flags_full[offset + j] = det.flags[j];
        for (std::size_t i = 0; i < n; ++i)
            result.any_flags[i] |= det.flags_full[i];

        result.channels.push_back(std::move(det));
    }
    return result;
}

namespace {

std::vector<std::string> coordinate_names(std::size_t r) {
    std::vector<std::string> names(r);
    for (std::size_t i = 0; i < r; ++i) names[i] = "v" + std::to_string(i + 1);
    return names;
}

}  // namespace

PredictResult run_predict(const MeasurementFrame& input, const PipelineConfig& cfg,
                          std::size_t train_count, std::size_t horizon) {
    PredictResult result;
    const MeasurementFrame frame = prepare_frame(input, cfg);
    const double dt = frame.sample_interval();
    if (dt <= 0.0)
        throw DataError("series is not uniformly sampled; set io.resample_interval");

    const std::size_t min_train =
        std::max<std::size_t>(5, cfg.embedding.q * cfg.embedding.tau + 1);
    if (train_count < min_train)
        throw SeriesTooShort("training span must hold at least " +
                                 std::to_string(min_train) + " samples",
                             min_train);
    if (train_count > frame.size())
        throw DataError("training span exceeds input length");

    const auto names = effective_channels(frame, cfg);
    if (names.empty()) throw DataError("no channels to analyze");

    const auto& stamps = frame.timestamps();
    const auto interval_ns =
        static_cast<Timestamp>(std::llround(dt * kNanosPerSecond));

    std::size_t min_steps = horizon;
    for (const auto& name : names) {
        const auto series = select_channel(frame, name);
        std::span<const double> train(series.values.data(), train_count);
        std::span<const Timestamp> train_ts(series.timestamps.data(), train_count);

        const auto hankel =
            build_hankel(train, cfg.embedding.q, cfg.embedding.tau, dt, train_ts);
        const auto factors = svd_hankel(hankel);
        const std::size_t r = choose_rank(factors, cfg.embedding.rank_policy);
        const auto coords = delay_coordinates(factors, r);

        ChannelPrediction pred;
        pred.channel = name;
        try {
            pred.model = fit_sindy(coords.V_cols, dt, cfg.sindy.library,
                                   cfg.sindy.options, coordinate_names(r));
        } catch (const NoActiveTerms& e) {
            throw NoActiveTerms("channel " + name + ": " + e.what(), e.state_index);
        }

        if (horizon > 0) {
            const Eigen::VectorXd v_last =
                coords.V_cols.row(coords.V_cols.rows() - 1).transpose();
            const auto sim = simulate_sindy(pred.model, v_last, horizon);
            pred.diverged = sim.diverged;
            result.any_diverged |= sim.diverged;

            // new sample per simulated column: the window tail element
            const Eigen::Index q_tail = static_cast<Eigen::Index>(cfg.embedding.q) - 1;
            Eigen::VectorXd tail_weights(static_cast<Eigen::Index>(r));
            for (std::size_t i = 0; i < r; ++i)
                tail_weights(static_cast<Eigen::Index>(i)) =
                    factors.U(q_tail, static_cast<Eigen::Index>(i)) *
                    factors.S(static_cast<Eigen::Index>(i));
            pred.predicted.resize(sim.steps);
            for (std::size_t k = 0; k < sim.steps; ++k)
                pred.predicted[k] =
                    sim.states.row(static_cast<Eigen::Index>(k)).dot(tail_weights);

            const std::size_t avail =
                frame.size() > train_count ? frame.size() - train_count : 0;
            const std::size_t overlap = std::min(avail, sim.steps);
            if (overlap > 0) {
                pred.actual.assign(series.values.begin() + train_count,
                                   series.values.begin() + train_count + overlap);
                pred.report = regression_metrics(
                    pred.actual, std::span<const double>(pred.predicted.data(), overlap));
                pred.has_report = true;
            }
        }
        min_steps = std::min(min_steps, pred.predicted.size());
        result.channels.push_back(std::move(pred));
    }

    // assemble the predicted frame (uniform length across channels)
    std::vector<Timestamp> pred_ts(min_steps);
    const Timestamp t0 = stamps[train_count - 1];
    for (std::size_t k = 0; k < min_steps; ++k)
        pred_ts[k] = t0 + static_cast<Timestamp>(k + 1) * interval_ns;
    std::vector<std::string> pred_names;
    std::vector<std::vector<double>> pred_cols;
    for (const auto& ch : result.channels) {
        pred_names.push_back(ch.channel);
        pred_cols.emplace_back(ch.predicted.begin(), ch.predicted.begin() + min_steps);
    }
    result.predicted_frame =
        MeasurementFrame(std::move(pred_ts), std::move(pred_names), std::move(pred_cols));
    result.predicted_frame.set_sample_interval(dt);

    if (min_steps > 0) {
        try {
            auto detect = run_detect(result.predicted_frame, cfg);
            for (auto& ch : detect.channels)
                for (auto& ev : ch.events)
                    result.predicted_events.push_back(std::move(ev));
        } catch (const SeriesTooShort&) {
            // horizon shorter than one delay window: no event scan
        }
    }
    return result;
}

PredictResult predict_and_detect(const MeasurementFrame& train,
                                 const PipelineConfig& cfg, std::size_t horizon) {
    return run_predict(train, cfg, train.size(), horizon);
}

}  // namespace dynamo

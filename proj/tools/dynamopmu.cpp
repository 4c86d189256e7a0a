#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dynamo/error.hpp"
#include "dynamo/pipeline.hpp"
#include "dynamo/serialize.hpp"
#include "dynamo/version.hpp"

namespace fs = std::filesystem;
using namespace dynamo;

namespace {

// When the config maps no columns, analyze everything in the header
// except the timestamp and the reserved "truth" label column.
void auto_map_columns(const std::string& path, CsvSchema& schema) {
    if (!schema.columns.empty()) return;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open input file: " + path);
    std::string header;
    if (!std::getline(in, header)) throw EmptyInput("input has no header row");
    std::istringstream ss(header);
    std::string column;
    while (std::getline(ss, column, schema.delimiter)) {
        if (!column.empty() && column.back() == '\r') column.pop_back();
        if (column.empty() || column == schema.timestamp_column || column == "truth")
            continue;
        ChannelSpec spec;
        spec.name = column;
        spec.kind = ChannelKind::derived;
        schema.columns[column] = std::move(spec);
    }
}

std::string now_iso() {
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    const auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(now).count();
    return format_timestamp(static_cast<Timestamp>(ns));
}

void write_manifest(const fs::path& dir, const std::string& config_path,
                    const std::string& input_path) {
    Manifest m;
    m.tool_version = kToolVersion;
    m.config_hash = config_path.empty() ? "defaults" : hash_file(config_path);
    m.input_hash = input_path.empty() ? "none" : hash_file(input_path);
    m.created_at = now_iso();
    atomic_write((dir / "manifest.json").string(),
                 [&](std::ostream& out) { out << manifest_json(m) << '\n'; });
}

struct CommonArgs {
    std::string input;
    std::string config;
    std::string output;
    std::vector<std::string> channels;
};

PipelineConfig load_config(const CommonArgs& args) {
    PipelineConfig cfg = args.config.empty() ? PipelineConfig::defaults()
                                             : load_pipeline_config(args.config);
    if (!args.channels.empty()) cfg.channels = args.channels;
    return cfg;
}

void write_flags_csv(const fs::path& path, const DetectResult& result) {
    atomic_write(path.string(), [&](std::ostream& out) {
        out << "ts";
        for (const auto& ch : result.channels)
            out << ",flag_" << ch.channel << ",score_" << ch.channel;
        out << ",any,score\n";
        const auto& ts = result.frame.timestamps();
        const std::size_t offset = result.frame.size() >= result.channels[0].flags.size()
                                       ? result.frame.size() -
                                             result.channels[0].flags.size()
                                       : 0;
        for (std::size_t i = 0; i < result.frame.size(); ++i) {
            out << format_timestamp(ts[i]);
            double best = 0.0;
            for (const auto& ch : result.channels) {
                const bool in_range = i >= offset;
                const double score = in_range ? ch.scores[i - offset] : 0.0;
                out << ',' << (in_range && ch.flags_full[i] ? 1 : 0) << ','
                    << format_value(score);
                best = std::max(best, score);
            }
            out << ',' << static_cast<int>(result.any_flags[i]) << ','
                << format_value(best) << '\n';
        }
    });
}

int cmd_detect(const CommonArgs& args) {
    PipelineConfig cfg = load_config(args);
    auto_map_columns(args.input, cfg.io.schema);
    const auto frame = parse_pmu_csv_file(args.input, cfg.io.schema);

    const auto result = run_detect(frame, cfg);

    const fs::path dir(args.output);
    fs::create_directories(dir);

    for (const auto& ch : result.channels) {
        atomic_write((dir / ("forcing_" + ch.channel + ".csv")).string(),
                     [&](std::ostream& out) {
                         out << "ts,forcing\n";
                         for (std::size_t j = 0; j < ch.forcing.size(); ++j)
                             out << format_timestamp(ch.forcing_timestamps[j]) << ','
                                 << format_value(ch.forcing[j]) << '\n';
                     });
        atomic_write((dir / ("plot_" + ch.channel + ".csv")).string(),
                     [&](std::ostream& out) {
                         out << "t,measurement,forcing,flag\n";
                         const auto& ts = result.frame.timestamps();
                         const auto& col = result.frame.column(ch.channel);
                         const std::size_t offset =
                             result.frame.size() - ch.forcing.size();
                         for (std::size_t i = 0; i < result.frame.size(); ++i) {
                             out << format_timestamp(ts[i]) << ','
                                 << format_value(col[i]) << ',';
                             if (i >= offset)
                                 out << format_value(ch.forcing[i - offset]);
                             out << ',' << static_cast<int>(ch.flags_full[i]) << '\n';
                         }
                     });
        save_svd_factors(ch.factors, (dir / ("model_" + ch.channel + ".bin")).string());
        atomic_write((dir / ("havok_" + ch.channel + ".json")).string(),
                     [&](std::ostream& out) {
                         out << havok_model_json(ch.model) << '\n';
                     });
    }

    write_flags_csv(dir / "flags.csv", result);

    std::vector<AnomalyEvent> all_events;
    for (const auto& ch : result.channels)
        all_events.insert(all_events.end(), ch.events.begin(), ch.events.end());
    atomic_write((dir / "events.csv").string(),
                 [&](std::ostream& out) { write_events_csv(all_events, out); });
    atomic_write((dir / "events.jsonl").string(),
                 [&](std::ostream& out) { write_events_jsonl(all_events, out); });

    write_manifest(dir, args.config, args.input);

    std::cout << "detect: " << result.channels.size() << " channel(s), "
              << all_events.size() << " event(s) -> " << dir.string() << "\n";
    return 0;
}

int cmd_predict(const CommonArgs& args, const std::string& split) {
    PipelineConfig cfg = load_config(args);
    auto_map_columns(args.input, cfg.io.schema);
    const auto raw = parse_pmu_csv_file(args.input, cfg.io.schema);
    const auto frame = prepare_frame(raw, cfg);

    const std::size_t n = frame.size();
    std::size_t train_count = 0;
    if (split.find('-') != std::string::npos || split.find(':') != std::string::npos) {
        const auto at = parse_timestamp(split);
        if (!at) throw ConfigError("split timestamp does not parse: " + split);
        while (train_count < n && frame.timestamps()[train_count] < *at) ++train_count;
    } else {
        const double f = std::stod(split);
        if (!(f > 0.0 && f < 1.0))
            throw ConfigError("split fraction must lie strictly between 0 and 1");
        train_count = static_cast<std::size_t>(static_cast<double>(n) * f);
    }
    if (train_count < 5 || train_count >= n)
        throw ConfigError("split must leave at least 5 training and 1 test sample");

    const std::size_t horizon = n - train_count;
    const auto result = run_predict(frame, cfg, train_count, horizon);

    const fs::path dir(args.output);
    fs::create_directories(dir);

    for (const auto& ch : result.channels) {
        atomic_write(
            (dir / ("predicted_vs_actual_" + ch.channel + ".csv")).string(),
            [&](std::ostream& out) {
                out << "ts,actual,predicted\n";
                const auto& ts = result.predicted_frame.timestamps();
                for (std::size_t k = 0; k < ch.predicted.size(); ++k) {
                    if (k < ts.size())
                        out << format_timestamp(ts[k]);
                    out << ',';
                    if (k < ch.actual.size()) out << format_value(ch.actual[k]);
                    out << ',' << format_value(ch.predicted[k]) << '\n';
                }
            });
        if (ch.has_report)
            atomic_write((dir / ("regression_" + ch.channel + ".json")).string(),
                         [&](std::ostream& out) {
                             out << regression_report_json(ch.report) << '\n';
                         });
        atomic_write((dir / ("sindy_" + ch.channel + ".json")).string(),
                     [&](std::ostream& out) {
                         out << sindy_model_json(ch.model) << '\n';
                     });
    }

    atomic_write((dir / "predicted_events.csv").string(), [&](std::ostream& out) {
        write_events_csv(result.predicted_events, out);
    });
    atomic_write((dir / "predicted_events.jsonl").string(), [&](std::ostream& out) {
        write_events_jsonl(result.predicted_events, out);
    });
    write_manifest(dir, args.config, args.input);

    for (const auto& ch : result.channels)
        if (ch.has_report)
            std::cout << ch.channel << ": r2=" << ch.report.r2
                      << " rmse=" << ch.report.rmse << "\n";

    if (result.any_diverged) {
        std::cerr << "predict: simulation left finite range before the horizon\n";
        return 5;
    }
    return 0;
}

std::vector<double> read_csv_column(const std::string& path, const std::string& column,
                                    char delimiter) {
    CsvSchema schema;
    schema.delimiter = delimiter;
    ChannelSpec spec;
    spec.name = column;
    schema.columns[column] = spec;
    const auto frame = parse_pmu_csv_file(path, schema);
    if (!frame.has_channel(column))
        throw DataError("column '" + column + "' not found in " + path);
    return frame.column(column);
}

int cmd_evaluate(const std::string& predicted_path, const std::string& truth_path,
                 std::size_t tolerance, const std::string& kind,
                 const std::string& pred_column, const std::string& truth_column,
                 const std::string& scores_column, const std::string& output) {
    if (kind == "regression") {
        const auto actual = read_csv_column(predicted_path, "actual", ',');
        const auto predicted = read_csv_column(predicted_path, "predicted", ',');
        const auto report = regression_metrics(actual, predicted);
        std::cout << format_table(report);
        if (!output.empty()) {
            fs::create_directories(output);
            atomic_write((fs::path(output) / "regression_report.json").string(),
                         [&](std::ostream& out) {
                             out << regression_report_json(report) << '\n';
                         });
        }
        return 0;
    }

    const auto pred_vals = read_csv_column(predicted_path, pred_column, ',');
    const auto truth_vals = read_csv_column(truth_path, truth_column, ',');
    if (pred_vals.size() != truth_vals.size())
        throw LengthMismatch("predicted and truth files have different lengths: " +
                             std::to_string(pred_vals.size()) + " vs " +
                             std::to_string(truth_vals.size()));

    std::vector<std::uint8_t> pred(pred_vals.size()), truth(truth_vals.size());
    for (std::size_t i = 0; i < pred_vals.size(); ++i) pred[i] = pred_vals[i] != 0.0;
    for (std::size_t i = 0; i < truth_vals.size(); ++i) truth[i] = truth_vals[i] != 0.0;

    const auto cm = match_events(pred, truth, tolerance);
    auto report = detection_metrics(cm);
    if (!scores_column.empty()) {
        const auto scores = read_csv_column(predicted_path, scores_column, ',');
        report.auc = auc(scores, truth);
        report.has_auc = true;
    }

    std::cout << format_table(report);
    if (!output.empty()) {
        fs::create_directories(output);
        atomic_write((fs::path(output) / "detection_report.json").string(),
                     [&](std::ostream& out) {
                         out << detection_report_json(report) << '\n';
                     });
    }
    return 0;
}

int cmd_synth(const std::string& spec_path, const std::string& output,
              std::int64_t seed_override) {
    SynthConfig cfg = spec_path.empty() ? SynthConfig{} : load_synth_config(spec_path);
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);

    auto result = synth_pmu(cfg.profiles, cfg.noise_std, cfg.events, cfg.n, cfg.seed,
                            cfg.sample_interval);

    MeasurementFrame with_truth = result.frame;
    std::vector<double> truth_col(result.truth.begin(), result.truth.end());
    with_truth.add_channel("truth", std::move(truth_col));

    const fs::path out_path(output);
    if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
    atomic_write(output,
                 [&](std::ostream& out) { serialize_csv(with_truth, out); });

    std::cout << describe(cfg);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"HAVOK-based anomaly detection and SINDy prediction for "
                 "distribution-grid sensor streams"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    CommonArgs detect_args;
    auto* detect = app.add_subcommand("detect", "decompose channels and flag anomalies");
    detect->add_option("--input", detect_args.input, "input CSV")->required();
    detect->add_option("--config", detect_args.config, "pipeline config");
    detect->add_option("--output", detect_args.output, "output directory")->required();
    detect->add_option("--channels", detect_args.channels, "channel list")->delimiter(',');

    CommonArgs predict_args;
    std::string split = "0.8";
    auto* predict =
        app.add_subcommand("predict", "fit governing equations and forecast");
    predict->add_option("--input", predict_args.input, "input CSV")->required();
    predict->add_option("--config", predict_args.config, "pipeline config");
    predict->add_option("--output", predict_args.output, "output directory")->required();
    predict->add_option("--channels", predict_args.channels, "channel list")
        ->delimiter(',');
    predict->add_option("--split", split, "train fraction in (0,1) or ISO timestamp");

    std::string eval_predicted, eval_truth, eval_kind = "detection";
    std::string eval_pred_col = "any", eval_truth_col = "truth", eval_scores_col;
    std::string eval_output;
    std::size_t eval_tolerance = 2;
    auto* evaluate = app.add_subcommand("evaluate", "score flags or predictions");
    evaluate->add_option("--predicted", eval_predicted, "predicted flags/values CSV")
        ->required();
    evaluate->add_option("--truth", eval_truth, "truth flags CSV");
    evaluate->add_option("--tolerance", eval_tolerance, "match slack in samples");
    evaluate->add_option("--kind", eval_kind, "detection or regression");
    evaluate->add_option("--pred-column", eval_pred_col, "predicted flag column");
    evaluate->add_option("--truth-column", eval_truth_col, "truth flag column");
    evaluate->add_option("--scores-column", eval_scores_col, "score column for AUC");
    evaluate->add_option("--output", eval_output, "report output directory");

    std::string synth_spec, synth_output;
    std::int64_t synth_seed = -1;
    auto* synth = app.add_subcommand("synth", "generate a labeled synthetic file");
    synth->add_option("--spec", synth_spec, "synth spec config");
    synth->add_option("--output", synth_output, "output CSV path")->required();
    synth->add_option("--seed", synth_seed, "seed override");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (detect->parsed()) return cmd_detect(detect_args);
        if (predict->parsed()) return cmd_predict(predict_args, split);
        if (evaluate->parsed()) {
            if (eval_kind == "detection" && eval_truth.empty())
                throw ConfigError("evaluate --kind detection needs --truth");
            return cmd_evaluate(eval_predicted, eval_truth, eval_tolerance, eval_kind,
                                eval_pred_col, eval_truth_col, eval_scores_col,
                                eval_output);
        }
        if (synth->parsed()) return cmd_synth(synth_spec, synth_output, synth_seed);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}

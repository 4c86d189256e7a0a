#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dynamo {

struct ConfusionMatrix {
    std::uint64_t tp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const { return tp + tn + fp + fn; }
};

// Ratio metrics with a total zero-denominator policy: a metric whose
// denominator vanishes is reported as 0 with its degenerate flag set.
struct DetectionReport {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
    double mcc = 0.0;
    double auc = 0.0;
    bool has_auc = false;

    struct Degenerate {
        bool precision = false;
        bool recall = false;
        bool f1 = false;
        bool accuracy = false;
        bool mcc = false;
    } degenerate;
};

struct RegressionReport {
    double r2 = 0.0;
    double rmse = 0.0;
    double explained_variance = 0.0;
    double mae = 0.0;

    struct Degenerate {
        bool r2 = false;
        bool explained_variance = false;
    } degenerate;
};

// Sample-level matching with slack: a predicted positive is a TP when an
// unconsumed truth positive lies within +-tolerance samples (earliest one
// consumed first); leftover predictions are FP, leftover truths FN.
ConfusionMatrix match_events(std::span<const std::uint8_t> predicted,
                             std::span<const std::uint8_t> truth,
                             std::size_t tolerance);

DetectionReport detection_metrics(const ConfusionMatrix& cm);

// Mann-Whitney statistic P(score_pos > score_neg) + 0.5 P(tie), computed
// exactly via tie-averaged ranks. Throws DegenerateLabels when a class is
// absent.
double auc(std::span<const double> scores, std::span<const std::uint8_t> truth);

RegressionReport regression_metrics(std::span<const double> actual,
                                    std::span<const double> predicted);

// Plain-text table of either report (layout mirrors the usual
// metric-per-row score tables).
std::string format_table(const DetectionReport& r);
std::string format_table(const RegressionReport& r);

}  // namespace dynamo

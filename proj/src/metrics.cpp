#include "dynamo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "dynamo/error.hpp"

namespace dynamo {

ConfusionMatrix match_events(std::span<const std::uint8_t> predicted,
                             std::span<const std::uint8_t> truth,
                             std::size_t tolerance) {
    if (predicted.size() != truth.size())
        throw LengthMismatch("predicted and truth flag lengths differ: " +
                             std::to_string(predicted.size()) + " vs " +
                             std::to_string(truth.size()));
    const std::size_t n = predicted.size();

    std::vector<std::size_t> truth_pos;
    for (std::size_t i = 0; i < n; ++i)
        if (truth[i]) truth_pos.push_back(i);

    ConfusionMatrix cm;
    std::size_t next_truth = 0;  // earliest unconsumed truth positive
    std::uint64_t matched_truth = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!predicted[i]) continue;
        const std::size_t lo = i >= tolerance ? i - tolerance : 0;
        const std::size_t hi = i + tolerance;
        while (next_truth < truth_pos.size() && truth_pos[next_truth] < lo) ++next_truth;
        if (next_truth < truth_pos.size() && truth_pos[next_truth] <= hi) {
            ++cm.tp;
            ++matched_truth;
            ++next_truth;
        } else {
            ++cm.fp;
        }
    }
    cm.fn = truth_pos.size() - matched_truth;

    // negatives in both sequences
    std::uint64_t both_neg = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (!predicted[i] && !truth[i]) ++both_neg;
    cm.tn = both_neg;
    return cm;
}

namespace {

double ratio(std::uint64_t num, std::uint64_t den, bool& degenerate) {
    if (den == 0) {
        degenerate = true;
        return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

DetectionReport detection_metrics(const ConfusionMatrix& cm) {
    DetectionReport r;
    const double tp = static_cast<double>(cm.tp);
    const double tn = static_cast<double>(cm.tn);
    const double fp = static_cast<double>(cm.fp);
    const double fn = static_cast<double>(cm.fn);

    r.precision = ratio(cm.tp, cm.tp + cm.fp, r.degenerate.precision);
    r.recall = ratio(cm.tp, cm.tp + cm.fn, r.degenerate.recall);
    if (r.precision + r.recall > 0.0)
        r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
    else
        r.degenerate.f1 = true;
    r.accuracy = ratio(cm.tp + cm.tn, cm.total(), r.degenerate.accuracy);

    const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    if (denom > 0.0)
        r.mcc = (tp * tn - fp * fn) / std::sqrt(denom);
    else
        r.degenerate.mcc = true;
    return r;
}

double auc(std::span<const double> scores, std::span<const std::uint8_t> truth) {
    if (scores.size() != truth.size())
        throw LengthMismatch("scores and labels lengths differ");
    const std::size_t n = scores.size();
    std::uint64_t n_pos = 0;
    for (auto t : truth) n_pos += t ? 1 : 0;
    const std::uint64_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw DegenerateLabels("AUC needs at least one positive and one negative label");

    // tie-averaged ranks give the exact Mann-Whitney pair statistic
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + j - 1) + 1.0;  // 1-based
        for (std::size_t k = i; k < j; ++k)
            if (truth[order[k]]) pos_rank_sum += avg_rank;
        i = j;
    }
    const double u = pos_rank_sum - 0.5 * static_cast<double>(n_pos) *
                                        static_cast<double>(n_pos + 1);
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

RegressionReport regression_metrics(std::span<const double> actual,
                                    std::span<const double> predicted) {
    if (actual.empty()) throw EmptyInput("regression metrics need at least one sample");
    if (actual.size() != predicted.size())
        throw LengthMismatch("actual and predicted lengths differ: " +
                             std::to_string(actual.size()) + " vs " +
                             std::to_string(predicted.size()));
    const double n = static_cast<double>(actual.size());

    double y_mean = 0.0;
    for (double y : actual) y_mean += y;
    y_mean /= n;

    double ss_res = 0.0, ss_tot = 0.0, abs_sum = 0.0, res_mean = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double e = actual[i] - predicted[i];
        ss_res += e * e;
        abs_sum += std::fabs(e);
        res_mean += e;
        const double d = actual[i] - y_mean;
        ss_tot += d * d;
    }
    res_mean /= n;

    double res_var = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double e = actual[i] - predicted[i] - res_mean;
        res_var += e * e;
    }

    RegressionReport r;
    r.rmse = std::sqrt(ss_res / n);
    r.mae = abs_sum / n;
    if (ss_tot > 0.0) {
        r.r2 = 1.0 - ss_res / ss_tot;
        r.explained_variance = 1.0 - res_var / ss_tot;
    } else {
        r.degenerate.r2 = true;
        r.degenerate.explained_variance = true;
    }
    return r;
}

namespace {

std::string table_row(const char* name, double value, bool degenerate) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%-12s %8.4f%s\n", name, value,
                  degenerate ? " (degenerate)" : "");
    return buf;
}

}  // namespace

std::string format_table(const DetectionReport& r) {
    std::string out = "Metric          Score\n";
    out += table_row("Precision", r.precision, r.degenerate.precision);
    out += table_row("Recall", r.recall, r.degenerate.recall);
    out += table_row("F1", r.f1, r.degenerate.f1);
    out += table_row("Accuracy", r.accuracy, r.degenerate.accuracy);
    out += table_row("MCC", r.mcc, r.degenerate.mcc);
    out += r.has_auc ? table_row("AUC", r.auc, false) : "AUC                NA\n";
    return out;
}

std::string format_table(const RegressionReport& r) {
    std::string out = "Metric          Score\n";
    out += table_row("R2", r.r2, r.degenerate.r2);
    out += table_row("RMSE", r.rmse, false);
    out += table_row("Variance", r.explained_variance, r.degenerate.explained_variance);
    out += table_row("MAE", r.mae, false);
    return out;
}

}  // namespace dynamo

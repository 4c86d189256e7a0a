#include "dynamo/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dynamo/error.hpp"
#include "dynamo/kernels.hpp"

namespace dynamo {

EigenCoordinates::EigenCoordinates(Eigen::MatrixXd cols, std::size_t rank, double dt_s,
                                   std::vector<Timestamp> stamps)
    : V_cols(std::move(cols)), r(rank), dt(dt_s), timestamps(std::move(stamps)) {
    if (r < 2)
        throw RankTooLarge("rank must be at least 2 (one linear state plus forcing)");
    if (V_cols.cols() != static_cast<Eigen::Index>(r))
        throw DataError("coordinate matrix width differs from rank");
    if (!timestamps.empty() &&
        timestamps.size() != static_cast<std::size_t>(V_cols.rows()))
        throw LengthMismatch("coordinate timestamps length differs from rows");
}

HankelMatrix build_hankel(std::span<const double> series, std::size_t q, std::size_t tau,
                          double dt, std::span<const Timestamp> timestamps) {
    if (q < 2) throw ConfigError("hankel depth q must be at least 2");
    if (tau < 1) throw ConfigError("delay tau must be at least 1");
    const std::size_t min_len = q * tau + 1;
    if (series.size() < min_len)
        throw SeriesTooShort("series length " + std::to_string(series.size()) +
                                 " below minimum " + std::to_string(min_len) +
                                 " for q=" + std::to_string(q) +
                                 ", tau=" + std::to_string(tau),
                             min_len);
    if (!timestamps.empty() && timestamps.size() != series.size())
        throw LengthMismatch("timestamps length differs from series length");

    HankelMatrix h;
    h.q = q;
    h.tau = tau;
    h.dt = dt;
    h.p = series.size() - (q - 1) * tau;
    h.data.resize(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(h.p));
    kernels::hankel_fill(series, tau, h.data);
    if (!timestamps.empty())
        h.origin_timestamps.assign(timestamps.begin(), timestamps.begin() + h.p);
    return h;
}

SvdFactors svd_hankel(const HankelMatrix& h) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(h.data,
                                       Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success)
        throw NumericalFailure("singular value decomposition did not converge");

    SvdFactors f;
    f.U = svd.matrixU();
    f.S = svd.singularValues();
    f.V = svd.matrixV();
    f.full_spectrum = f.S;
    f.q = h.q;
    f.p = h.p;
    f.tau = h.tau;
    f.dt = h.dt;
    f.origin_timestamps = h.origin_timestamps;

    // Fix the SVD sign ambiguity: largest-magnitude entry of each U column
    // positive (first index wins ties), V flipped to match.
    for (Eigen::Index k = 0; k < f.U.cols(); ++k) {
        Eigen::Index imax = 0;
        double vmax = 0.0;
        for (Eigen::Index i = 0; i < f.U.rows(); ++i) {
            const double a = std::fabs(f.U(i, k));
            if (a > vmax) {
                vmax = a;
                imax = i;
            }
        }
        if (f.U(imax, k) < 0.0) {
            f.U.col(k) = -f.U.col(k);
            f.V.col(k) = -f.V.col(k);
        }
    }
    return f;
}

namespace {

std::size_t clamp_rank(std::size_t r, std::size_t len) {
    return std::clamp<std::size_t>(r, std::min<std::size_t>(2, len), len);
}

}  // namespace

std::size_t choose_rank(std::span<const double> spectrum, const RankPolicy& policy,
                        double aspect_ratio) {
    if (spectrum.empty()) throw DataError("empty singular spectrum");
    const std::size_t len = spectrum.size();

    if (const auto* fixed = std::get_if<RankFixed>(&policy))
        return clamp_rank(fixed->r, len);

    if (const auto* energy = std::get_if<RankEnergy>(&policy)) {
        double total = 0.0;
        for (double s : spectrum) total += s * s;
        if (total <= 0.0) return clamp_rank(2, len);
        double acc = 0.0;
        for (std::size_t i = 0; i < len; ++i) {
            acc += spectrum[i] * spectrum[i];
            if (acc / total >= energy->fraction) return clamp_rank(i + 1, len);
        }
        return len;
    }

    // hard threshold: Gavish-Donoho omega(beta) approximation, unknown noise
    const double beta = std::clamp(aspect_ratio, 1e-12, 1.0);
    const double omega = 0.56 * beta * beta * beta - 0.95 * beta * beta +
                         1.82 * beta + 1.43;
    std::vector<double> sorted(spectrum.begin(), spectrum.end());
    std::sort(sorted.begin(), sorted.end());
    const double median = len % 2 == 1
                              ? sorted[len / 2]
                              : 0.5 * (sorted[len / 2 - 1] + sorted[len / 2]);
    const double floor = 1e-12 * spectrum[0];  // numerical-rank cutoff
    const double threshold = std::max(omega * median, floor);
    std::size_t r = 0;
    while (r < len && spectrum[r] > threshold) ++r;
    return clamp_rank(r, len);
}

std::size_t choose_rank(const SvdFactors& f, const RankPolicy& policy) {
    const double lo = static_cast<double>(std::min(f.q, f.p));
    const double hi = static_cast<double>(std::max(f.q, f.p));
    std::span<const double> spectrum(f.full_spectrum.data(),
                                     static_cast<std::size_t>(f.full_spectrum.size()));
    return choose_rank(spectrum, policy, lo / hi);
}

EigenCoordinates delay_coordinates(const SvdFactors& f, std::size_t r) {
    if (r > static_cast<std::size_t>(f.V.cols()))
        throw RankTooLarge("rank " + std::to_string(r) + " exceeds available " +
                           std::to_string(f.V.cols()) + " columns");
    // stamp each coordinate sample with its window's newest measurement
    std::vector<Timestamp> stamps;
    if (!f.origin_timestamps.empty()) {
        const auto shift = static_cast<Timestamp>(
            std::llround(static_cast<double>((f.q - 1) * f.tau) * f.dt *
                         static_cast<double>(kNanosPerSecond)));
        stamps.reserve(f.origin_timestamps.size());
        for (Timestamp t : f.origin_timestamps) stamps.push_back(t + shift);
    }
    return EigenCoordinates(f.V.leftCols(static_cast<Eigen::Index>(r)), r, f.dt,
                            std::move(stamps));
}

RankPolicy rank_policy_from_string(const std::string& text) {
    if (text == "hard_threshold") return RankHardThreshold{};
    const auto colon = text.find(':');
    if (colon != std::string::npos) {
        const std::string head = text.substr(0, colon);
        const std::string arg = text.substr(colon + 1);
        if (head == "fixed") return RankFixed{static_cast<std::size_t>(std::stoul(arg))};
        if (head == "energy") return RankEnergy{std::stod(arg)};
    }
    throw ConfigError("unknown rank policy: " + text +
                      " (expected fixed:N, energy:F, or hard_threshold)");
}

std::string to_string(const RankPolicy& policy) {
    if (const auto* fixed = std::get_if<RankFixed>(&policy))
        return "fixed:" + std::to_string(fixed->r);
    if (const auto* energy = std::get_if<RankEnergy>(&policy))
        return "energy:" + std::to_string(energy->fraction);
    return "hard_threshold";
}

}  // namespace dynamo

#pragma once

#include <Eigen/Dense>

#include <span>
#include <variant>
#include <vector>

#include "dynamo/time.hpp"

namespace dynamo {

// Delay-coordinate trajectory matrix: data(i, j) = series[i*tau + j].
// Anti-diagonals are constant for tau = 1 by construction.
struct HankelMatrix {
    Eigen::MatrixXd data;  // q x p
    std::size_t q = 0;     // delay depth (rows)
    std::size_t p = 0;     // window count (columns)
    std::size_t tau = 1;   // delay in samples
    double dt = 1.0;       // sampling interval, seconds
    std::vector<Timestamp> origin_timestamps;  // instants of column heads
};

// Economy SVD of a Hankel matrix. Columns of U and V are orthonormal, S is
// non-negative and non-increasing, and each U column is sign-fixed so its
// largest-magnitude entry is positive.
struct SvdFactors {
    Eigen::MatrixXd U;             // q x m
    Eigen::VectorXd S;             // m, descending
    Eigen::MatrixXd V;             // p x m
    Eigen::VectorXd full_spectrum; // all min(q, p) singular values
    std::size_t q = 0;
    std::size_t p = 0;
    std::size_t tau = 1;
    double dt = 1.0;
    std::vector<Timestamp> origin_timestamps;
};

// First r columns of V: the eigen time-delay coordinates. Timestamps are
// aligned to the newest sample of each delay window (causal convention),
// so a streaming consumer sees the same stamps.
struct EigenCoordinates {
    Eigen::MatrixXd V_cols;  // p x r
    std::size_t r = 0;
    double dt = 1.0;
    std::vector<Timestamp> timestamps;  // p instants, window tails

    EigenCoordinates(Eigen::MatrixXd cols, std::size_t rank, double dt_s,
                     std::vector<Timestamp> stamps);
};

struct RankFixed {
    std::size_t r;
};
struct RankEnergy {
    double fraction;  // cumulative squared-energy target in (0, 1]
};
// Optimal singular-value hard threshold for the matrix aspect ratio
// (Gavish-Donoho omega(beta) approximation against the median singular
// value), with a numerical-rank floor of 1e-12 * sigma_max.
struct RankHardThreshold {};

using RankPolicy = std::variant<RankFixed, RankEnergy, RankHardThreshold>;

RankPolicy rank_policy_from_string(const std::string& text);
std::string to_string(const RankPolicy& policy);

// pre: len(series) >= q*tau + 1, q >= 2, tau >= 1. Throws SeriesTooShort.
HankelMatrix build_hankel(std::span<const double> series, std::size_t q, std::size_t tau,
                          double dt, std::span<const Timestamp> timestamps = {});

// Economy-size SVD; full q x p factors are never materialized beyond the
// thin U/V. Deterministic via the U-column sign convention.
SvdFactors svd_hankel(const HankelMatrix& h);

// aspect_ratio = min(q, p) / max(q, p); only the hard-threshold policy
// uses it. Result is clamped to [2, spectrum length].
std::size_t choose_rank(std::span<const double> spectrum, const RankPolicy& policy,
                        double aspect_ratio = 1.0);
std::size_t choose_rank(const SvdFactors& f, const RankPolicy& policy);

// First r columns of V. Throws RankTooLarge.
EigenCoordinates delay_coordinates(const SvdFactors& f, std::size_t r);

}  // namespace dynamo

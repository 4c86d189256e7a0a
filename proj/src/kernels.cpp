#include "dynamo/kernels.hpp"

#include <omp.h>

#include <cmath>

#include "dynamo/parallel.hpp"

namespace dynamo::kernels {

namespace {

constexpr std::size_t kBlock = 4096;

constexpr double kDegToRad = 0.017453292519943295;

// Wrap degrees into [-180, 180). fmod against 360 is exact in IEEE
// arithmetic and the +-360 adjustment is exact by Sterbenz, so inputs
// differing by whole turns wrap to bitwise-identical values.
inline double wrap_degrees(double d) {
    double r = std::fmod(d, 360.0);
    if (r < -180.0) r += 360.0;
    if (r >= 180.0) r -= 360.0;
    return r;
}

// Angles are wrapped before differencing; a 360-degree shift of either
// input then cannot perturb the result.
inline double pf_one(double v, double i) {
    return std::cos(wrap_degrees(wrap_degrees(v) - wrap_degrees(i)) * kDegToRad);
}

inline double window_dot(const double* series, const double* u, std::size_t q,
                         std::size_t tau) {
    double acc = 0.0;
    for (std::size_t i = 0; i < q; ++i) acc += u[i] * series[i * tau];
    return acc;
}

inline double monomial_one(const MatrixXd& X, Eigen::Index row,
                           const std::uint8_t* expo, Eigen::Index n_states) {
    double acc = 1.0;
    for (Eigen::Index s = 0; s < n_states; ++s) {
        const int e = expo[s];
        double base = X(row, s);
        for (int k = 0; k < e; ++k) acc *= base;
    }
    return acc;
}

}  // namespace

void hankel_fill_serial(std::span<const double> series, std::size_t tau, MatrixXd& out) {
    const Eigen::Index q = out.rows(), p = out.cols();
    for (Eigen::Index i = 0; i < q; ++i)
        for (Eigen::Index j = 0; j < p; ++j)
            out(i, j) = series[static_cast<std::size_t>(i) * tau + j];
}

void hankel_fill_parallel(std::span<const double> series, std::size_t tau, MatrixXd& out) {
    const Eigen::Index q = out.rows(), p = out.cols();
#pragma omp parallel for num_threads(max_threads()) schedule(static)
    for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index i = 0; i < q; ++i)
            out(i, j) = series[static_cast<std::size_t>(i) * tau + j];
}

void hankel_fill(std::span<const double> series, std::size_t tau, MatrixXd& out) {
    if (parallel_enabled())
        hankel_fill_parallel(series, tau, out);
    else
        hankel_fill_serial(series, tau, out);
}

void project_windows_serial(std::span<const double> series, const MatrixXd& basis,
                            const VectorXd& sigma, std::size_t tau, MatrixXd& coords) {
    const Eigen::Index p = coords.rows(), r = coords.cols();
    const std::size_t q = static_cast<std::size_t>(basis.rows());
    for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index k = 0; k < r; ++k)
            coords(j, k) =
                window_dot(series.data() + j, basis.col(k).data(), q, tau) / sigma[k];
}

void project_windows_parallel(std::span<const double> series, const MatrixXd& basis,
                              const VectorXd& sigma, std::size_t tau, MatrixXd& coords) {
    const Eigen::Index p = coords.rows(), r = coords.cols();
    const std::size_t q = static_cast<std::size_t>(basis.rows());
#pragma omp parallel for num_threads(max_threads()) schedule(static)
    for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index k = 0; k < r; ++k)
            coords(j, k) =
                window_dot(series.data() + j, basis.col(k).data(), q, tau) / sigma[k];
}

void project_windows(std::span<const double> series, const MatrixXd& basis,
                     const VectorXd& sigma, std::size_t tau, MatrixXd& coords) {
    if (parallel_enabled())
        project_windows_parallel(series, basis, sigma, tau, coords);
    else
        project_windows_serial(series, basis, sigma, tau, coords);
}

void power_factor_serial(std::span<const double> v_angle, std::span<const double> i_angle,
                         std::span<double> out) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = pf_one(v_angle[i], i_angle[i]);
}

void power_factor_parallel(std::span<const double> v_angle, std::span<const double> i_angle,
                           std::span<double> out) {
    const auto n = static_cast<std::int64_t>(out.size());
#pragma omp parallel for num_threads(max_threads()) schedule(static)
    for (std::int64_t i = 0; i < n; ++i) out[i] = pf_one(v_angle[i], i_angle[i]);
}

void power_factor(std::span<const double> v_angle, std::span<const double> i_angle,
                  std::span<double> out) {
    if (parallel_enabled())
        power_factor_parallel(v_angle, i_angle, out);
    else
        power_factor_serial(v_angle, i_angle, out);
}

namespace {

inline double diff4_at(const MatrixXd& V, Eigen::Index i, Eigen::Index c, double inv12dt) {
    return (V(i - 2, c) - 8.0 * V(i - 1, c) + 8.0 * V(i + 1, c) - V(i + 2, c)) * inv12dt;
}

}  // namespace

void central_diff4_serial(const MatrixXd& V, double dt, MatrixXd& out) {
    const double inv12dt = 1.0 / (12.0 * dt);
    const Eigen::Index n = out.rows(), c = V.cols();
    for (Eigen::Index k = 0; k < c; ++k)
        for (Eigen::Index i = 0; i < n; ++i) out(i, k) = diff4_at(V, i + 2, k, inv12dt);
}

void central_diff4_parallel(const MatrixXd& V, double dt, MatrixXd& out) {
    const double inv12dt = 1.0 / (12.0 * dt);
    const Eigen::Index n = out.rows(), c = V.cols();
#pragma omp parallel for num_threads(max_threads()) schedule(static) collapse(2)
    for (Eigen::Index k = 0; k < c; ++k)
        for (Eigen::Index i = 0; i < n; ++i) out(i, k) = diff4_at(V, i + 2, k, inv12dt);
}

void central_diff4(const MatrixXd& V, double dt, MatrixXd& out) {
    if (parallel_enabled())
        central_diff4_parallel(V, dt, out);
    else
        central_diff4_serial(V, dt, out);
}

void deviation_flags_serial(std::span<const double> x, double mu, double sigma, double k,
                            std::vector<std::uint8_t>& flags) {
    const double thr = k * sigma;
    for (std::size_t i = 0; i < x.size(); ++i)
        flags[i] = std::fabs(x[i] - mu) > thr ? 1 : 0;
}

void deviation_flags_parallel(std::span<const double> x, double mu, double sigma, double k,
                              std::vector<std::uint8_t>& flags) {
    const double thr = k * sigma;
    const auto n = static_cast<std::int64_t>(x.size());
#pragma omp parallel for num_threads(max_threads()) schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
        flags[i] = std::fabs(x[i] - mu) > thr ? 1 : 0;
}

void deviation_flags(std::span<const double> x, double mu, double sigma, double k,
                     std::vector<std::uint8_t>& flags) {
    if (parallel_enabled())
        deviation_flags_parallel(x, mu, sigma, k, flags);
    else
        deviation_flags_serial(x, mu, sigma, k, flags);
}

namespace {

inline double partial_sum(std::span<const double> x, std::size_t begin, std::size_t end) {
    double acc = 0.0;
    for (std::size_t i = begin; i < end; ++i) acc += x[i];
    return acc;
}

inline double partial_sum_sq_dev(std::span<const double> x, double mu, std::size_t begin,
                                 std::size_t end) {
    double acc = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        const double d = x[i] - mu;
        acc += d * d;
    }
    return acc;
}

}  // namespace

double block_sum_serial(std::span<const double> x) {
    const std::size_t nb = (x.size() + kBlock - 1) / kBlock;
    double acc = 0.0;
    for (std::size_t b = 0; b < nb; ++b)
        acc += partial_sum(x, b * kBlock, std::min(x.size(), (b + 1) * kBlock));
    return acc;
}

double block_sum_parallel(std::span<const double> x) {
    const std::size_t nb = (x.size() + kBlock - 1) / kBlock;
    std::vector<double> partials(nb, 0.0);
    const auto nbi = static_cast<std::int64_t>(nb);
#pragma omp parallel for num_threads(max_threads()) schedule(static)
    for (std::int64_t b = 0; b < nbi; ++b)
        partials[b] = partial_sum(x, b * kBlock, std::min(x.size(), (b + 1) * kBlock));
    double acc = 0.0;
    for (double v : partials) acc += v;
    return acc;
}

double block_sum(std::span<const double> x) {
    return parallel_enabled() ? block_sum_parallel(x) : block_sum_serial(x);
}

double block_sum_sq_dev_serial(std::span<const double> x, double mu) {
    const std::size_t nb = (x.size() + kBlock - 1) / kBlock;
    double acc = 0.0;
    for (std::size_t b = 0; b < nb; ++b)
        acc += partial_sum_sq_dev(x, mu, b * kBlock, std::min(x.size(), (b + 1) * kBlock));
    return acc;
}

double block_sum_sq_dev_parallel(std::span<const double> x, double mu) {
    const std::size_t nb = (x.size() + kBlock - 1) / kBlock;
    std::vector<double> partials(nb, 0.0);
    const auto nbi = static_cast<std::int64_t>(nb);
#pragma omp parallel for num_threads(max_threads()) schedule(static)
    for (std::int64_t b = 0; b < nbi; ++b)
        partials[b] =
            partial_sum_sq_dev(x, mu, b * kBlock, std::min(x.size(), (b + 1) * kBlock));
    double acc = 0.0;
    for (double v : partials) acc += v;
    return acc;
}

double block_sum_sq_dev(std::span<const double> x, double mu) {
    return parallel_enabled() ? block_sum_sq_dev_parallel(x, mu)
                              : block_sum_sq_dev_serial(x, mu);
}

double max_abs_dev_serial(std::span<const double> x, double mu) {
    double m = 0.0;
    for (double v : x) m = std::max(m, std::fabs(v - mu));
    return m;
}

double max_abs_dev_parallel(std::span<const double> x, double mu) {
    double m = 0.0;
    const auto n = static_cast<std::int64_t>(x.size());
#pragma omp parallel for num_threads(max_threads()) schedule(static) reduction(max : m)
    for (std::int64_t i = 0; i < n; ++i) m = std::max(m, std::fabs(x[i] - mu));
    return m;
}

double max_abs_dev(std::span<const double> x, double mu) {
    return parallel_enabled() ? max_abs_dev_parallel(x, mu) : max_abs_dev_serial(x, mu);
}

void monomials_serial(const MatrixXd& X, std::span<const std::uint8_t> exponents,
                      std::size_t n_features, MatrixXd& theta) {
    const Eigen::Index n = X.rows(), s = X.cols();
    for (Eigen::Index f = 0; f < static_cast<Eigen::Index>(n_features); ++f) {
        const std::uint8_t* expo = exponents.data() + f * s;
        for (Eigen::Index i = 0; i < n; ++i) theta(i, f) = monomial_one(X, i, expo, s);
    }
}

void monomials_parallel(const MatrixXd& X, std::span<const std::uint8_t> exponents,
                        std::size_t n_features, MatrixXd& theta) {
    const Eigen::Index n = X.rows(), s = X.cols();
    const auto nf = static_cast<Eigen::Index>(n_features);
#pragma omp parallel for num_threads(max_threads()) schedule(static)
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index f = 0; f < nf; ++f)
            theta(i, f) = monomial_one(X, i, exponents.data() + f * s, s);
}

void monomials(const MatrixXd& X, std::span<const std::uint8_t> exponents,
               std::size_t n_features, MatrixXd& theta) {
    if (parallel_enabled())
        monomials_parallel(X, exponents, n_features, theta);
    else
        monomials_serial(X, exponents, n_features, theta);
}

MeanStd mean_std(std::span<const double> x) {
    MeanStd out;
    if (x.empty()) return out;
    const double n = static_cast<double>(x.size());
    out.mean = block_sum(x) / n;
    out.std = std::sqrt(block_sum_sq_dev(x, out.mean) / n);
    return out;
}

}  // namespace dynamo::kernels

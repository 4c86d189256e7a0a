#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

// Hot loops of the pipeline. Every kernel comes as a serial and an OpenMP
// variant with bit-identical results; the unsuffixed wrapper dispatches on
// dynamo::parallel_enabled(). The serial variants are the reference the
// equivalence tests and the benchmark run against.
namespace dynamo::kernels {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// out(i, j) = series[i*tau + j]; out must be pre-sized q x p.
void hankel_fill_serial(std::span<const double> series, std::size_t tau, MatrixXd& out);
void hankel_fill_parallel(std::span<const double> series, std::size_t tau, MatrixXd& out);
void hankel_fill(std::span<const double> series, std::size_t tau, MatrixXd& out);

// coords(j, k) = (1/sigma[k]) * sum_i basis(i, k) * series[j + i*tau]
// i.e. the projection of every delay window (window j starts at sample j,
// elements stride tau) onto the given left singular vectors. coords must
// be pre-sized p x r.
void project_windows_serial(std::span<const double> series, const MatrixXd& basis,
                            const VectorXd& sigma, std::size_t tau, MatrixXd& coords);
void project_windows_parallel(std::span<const double> series, const MatrixXd& basis,
                              const VectorXd& sigma, std::size_t tau, MatrixXd& coords);
void project_windows(std::span<const double> series, const MatrixXd& basis,
                     const VectorXd& sigma, std::size_t tau, MatrixXd& coords);

// cos of the wrapped angle difference, angles in degrees.
void power_factor_serial(std::span<const double> v_angle, std::span<const double> i_angle,
                         std::span<double> out);
void power_factor_parallel(std::span<const double> v_angle, std::span<const double> i_angle,
                           std::span<double> out);
void power_factor(std::span<const double> v_angle, std::span<const double> i_angle,
                  std::span<double> out);

// Fourth-order central differences along each column of V, interior rows
// only: out has V.rows()-4 rows, row i differentiates V row i+2.
void central_diff4_serial(const MatrixXd& V, double dt, MatrixXd& out);
void central_diff4_parallel(const MatrixXd& V, double dt, MatrixXd& out);
void central_diff4(const MatrixXd& V, double dt, MatrixXd& out);

// flags[i] = |x[i] - mu| > k * sigma
void deviation_flags_serial(std::span<const double> x, double mu, double sigma, double k,
                            std::vector<std::uint8_t>& flags);
void deviation_flags_parallel(std::span<const double> x, double mu, double sigma, double k,
                              std::vector<std::uint8_t>& flags);
void deviation_flags(std::span<const double> x, double mu, double sigma, double k,
                     std::vector<std::uint8_t>& flags);

// Deterministic blocked sums: fixed 4096-element blocks, partials combined
// in block order, so the value is independent of the thread count.
double block_sum_serial(std::span<const double> x);
double block_sum_parallel(std::span<const double> x);
double block_sum(std::span<const double> x);

// Sum of (x[i] - mu)^2 with the same blocking scheme.
double block_sum_sq_dev_serial(std::span<const double> x, double mu);
double block_sum_sq_dev_parallel(std::span<const double> x, double mu);
double block_sum_sq_dev(std::span<const double> x, double mu);

// max_i |x[i] - mu| (exact under any evaluation order).
double max_abs_dev_serial(std::span<const double> x, double mu);
double max_abs_dev_parallel(std::span<const double> x, double mu);
double max_abs_dev(std::span<const double> x, double mu);

// Monomial feature evaluation: theta(i, f) = prod_s X(i, s)^exponents[f][s].
// exponents is a flattened n_features x n_states row-major table.
void monomials_serial(const MatrixXd& X, std::span<const std::uint8_t> exponents,
                      std::size_t n_features, MatrixXd& theta);
void monomials_parallel(const MatrixXd& X, std::span<const std::uint8_t> exponents,
                        std::size_t n_features, MatrixXd& theta);
void monomials(const MatrixXd& X, std::span<const std::uint8_t> exponents,
               std::size_t n_features, MatrixXd& theta);

// Population mean and standard deviation via the blocked sums.
struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};
MeanStd mean_std(std::span<const double> x);

}  // namespace dynamo::kernels

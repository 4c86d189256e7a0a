#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "dynamo/embedding.hpp"
#include "dynamo/time.hpp"

namespace dynamo {

// Forced linear model on the first r-1 eigen time-delay coordinates:
// d/dt v = A v + B v_r.
struct HavokModel {
    Eigen::MatrixXd A;  // (r-1) x (r-1)
    Eigen::VectorXd B;  // (r-1)
    std::size_t r = 0;
    double dt = 1.0;
    double residual = 0.0;  // relative Frobenius residual of the fit
};

// The r-th coordinate with its sample statistics. std is the population
// estimator, matching the detector's three-sigma statistics.
struct ForcingSignal {
    std::vector<double> values;
    std::vector<Timestamp> timestamps;
    double mean = 0.0;
    double std = 0.0;

    ForcingSignal(std::vector<double> v, std::vector<Timestamp> ts);
};

// Fourth-order central differences over the interior samples; two samples
// are trimmed at each end. first/last give the retained row range of the
// source so callers can align V with dV.
struct DerivativeResult {
    Eigen::MatrixXd dV;      // (p-4) x r
    std::size_t first = 2;   // inclusive source row of dV row 0
    std::size_t last = 0;    // exclusive source row bound
};

DerivativeResult estimate_derivatives(const EigenCoordinates& V);

// Least-squares fit of d/dt v = A v + B v_r over the interior samples,
// solved via orthogonal decomposition of the stacked system. Throws
// SingularRegression when the linear block is rank-deficient.
HavokModel fit_forced_linear(const EigenCoordinates& V, const DerivativeResult& dV);

// Best-fit one-step propagator between time-aligned column blocks:
// advanced ~= P * block, P = advanced * pinv(block). Pseudoinverse by SVD
// with singular values below 1e-12 * sigma_max treated as zero.
Eigen::MatrixXd fit_discrete_propagator(const Eigen::MatrixXd& block,
                                        const Eigen::MatrixXd& advanced);

ForcingSignal forcing_signal(const EigenCoordinates& V);

// Classical RK4 integration of the forced linear system; forcing held
// piecewise-constant per step. Returns n states, one per step taken.
// Throws NonFiniteState when a component leaves finite range.
Eigen::MatrixXd simulate_linear(const HavokModel& model, const Eigen::VectorXd& v0,
                                std::span<const double> forcing, std::size_t n);

// Optional post-fit sparsification: zero entries of A and B with
// magnitude below lambda.
HavokModel sparsify(HavokModel model, double lambda);

// Projects raw delay windows onto the fitted singular directions so new
// samples can be scored without redoing the SVD. project_series evaluates
// every complete window of a batch; the window-at-a-time overload serves
// streaming consumers. Both reproduce the batch eigen coordinates.
class ForcingProjector {
  public:
    ForcingProjector(const SvdFactors& f, std::size_t r);

    std::size_t window() const { return q_; }
    std::size_t rank() const { return r_; }
    std::size_t tau() const { return tau_; }
    double dt() const { return dt_; }

    // forcing value (r-th coordinate) of one length-q window
    double project_window(std::span<const double> window) const;

    // all complete windows of a series: returns p = len - (q-1)*tau values
    std::vector<double> project_series(std::span<const double> series) const;

  private:
    Eigen::MatrixXd basis_;  // q x r
    Eigen::VectorXd sigma_;  // r
    std::size_t q_ = 0;
    std::size_t r_ = 0;
    std::size_t tau_ = 1;
    double dt_ = 1.0;
};

}  // namespace dynamo

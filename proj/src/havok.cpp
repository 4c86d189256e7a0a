#include "dynamo/havok.hpp"

#include <cmath>
#include <string>

#include "dynamo/error.hpp"
#include "dynamo/kernels.hpp"

namespace dynamo {

ForcingSignal::ForcingSignal(std::vector<double> v, std::vector<Timestamp> ts)
    : values(std::move(v)), timestamps(std::move(ts)) {
    if (values.size() != timestamps.size())
        throw LengthMismatch("forcing values and timestamps lengths differ");
    const auto ms = kernels::mean_std(values);
    mean = ms.mean;
    std = ms.std;
}

DerivativeResult estimate_derivatives(const EigenCoordinates& V) {
    const auto p = static_cast<std::size_t>(V.V_cols.rows());
    if (p < 5)
        throw TooFewPoints("need at least 5 samples for the derivative stencil, got " +
                           std::to_string(p));
    DerivativeResult out;
    out.first = 2;
    out.last = p - 2;
    out.dV.resize(static_cast<Eigen::Index>(p - 4), V.V_cols.cols());
    kernels::central_diff4(V.V_cols, V.dt, out.dV);
    return out;
}

HavokModel fit_forced_linear(const EigenCoordinates& V, const DerivativeResult& dV) {
    const auto r = static_cast<Eigen::Index>(V.r);
    const Eigen::Index n = dV.dV.rows();
    if (dV.first + static_cast<std::size_t>(n) != dV.last ||
        dV.last > static_cast<std::size_t>(V.V_cols.rows()))
        throw LengthMismatch("derivative block not aligned with coordinates");

    // regressors: all r coordinates over the interior samples
    const Eigen::MatrixXd R =
        V.V_cols.middleRows(static_cast<Eigen::Index>(dV.first), n);
    // targets: derivatives of the first r-1 coordinates
    const Eigen::MatrixXd T = dV.dV.leftCols(r - 1);

    // The fit is only meaningful when the linear states are independent;
    // a zero forcing column is fine (its coefficient stays 0).
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> gate(R.leftCols(r - 1));
    if (gate.rank() < r - 1)
        throw SingularRegression("linear coordinate block is rank-deficient: rank " +
                                 std::to_string(gate.rank()) + " of " +
                                 std::to_string(r - 1));

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(R);
    const Eigen::MatrixXd X = cod.solve(T);  // r x (r-1), minimum-norm

    HavokModel model;
    model.r = V.r;
    model.dt = V.dt;
    model.A = X.topRows(r - 1).transpose();
    model.B = X.row(r - 1).transpose();
    const double t_norm = T.norm();
    model.residual = t_norm > 0.0 ? (T - R * X).norm() / t_norm : 0.0;
    return model;
}

Eigen::MatrixXd fit_discrete_propagator(const Eigen::MatrixXd& block,
                                        const Eigen::MatrixXd& advanced) {
    if (block.rows() != advanced.rows() || block.cols() != advanced.cols())
        throw LengthMismatch("propagator blocks must have equal shapes");
    Eigen::BDCSVD<Eigen::MatrixXd> svd(block,
                                       Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& s = svd.singularValues();
    const double cutoff = s.size() > 0 ? 1e-12 * s(0) : 0.0;
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > cutoff) inv(i) = 1.0 / s(i);
    // advanced * V * S^-1 * U^T
    return advanced * svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

ForcingSignal forcing_signal(const EigenCoordinates& V) {
    const Eigen::Index p = V.V_cols.rows();
    std::vector<double> values(static_cast<std::size_t>(p));
    for (Eigen::Index i = 0; i < p; ++i)
        values[static_cast<std::size_t>(i)] =
            V.V_cols(i, static_cast<Eigen::Index>(V.r) - 1);

    std::vector<Timestamp> stamps = V.timestamps;
    if (stamps.empty()) {
        stamps.resize(static_cast<std::size_t>(p));
        for (Eigen::Index i = 0; i < p; ++i)
            stamps[static_cast<std::size_t>(i)] = static_cast<Timestamp>(
                std::llround(static_cast<double>(i) * V.dt *
                             static_cast<double>(kNanosPerSecond)));
    }
    return ForcingSignal(std::move(values), std::move(stamps));
}

Eigen::MatrixXd simulate_linear(const HavokModel& model, const Eigen::VectorXd& v0,
                                std::span<const double> forcing, std::size_t n) {
    const Eigen::Index d = model.A.rows();
    if (v0.size() != d) throw LengthMismatch("initial state dimension differs from model");
    if (forcing.size() < n)
        throw LengthMismatch("forcing sequence shorter than requested steps");

    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), d);
    Eigen::VectorXd v = v0;
    const double h = model.dt;
    Eigen::VectorXd k1(d), k2(d), k3(d), k4(d);
    for (std::size_t step = 0; step < n; ++step) {
        const double u = forcing[step];
        const Eigen::VectorXd bu = model.B * u;
        k1 = model.A * v + bu;
        k2 = model.A * (v + 0.5 * h * k1) + bu;
        k3 = model.A * (v + 0.5 * h * k2) + bu;
        k4 = model.A * (v + h * k3) + bu;
        v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!v.allFinite())
            throw NonFiniteState("state left finite range at step " +
                                 std::to_string(step + 1));
        out.row(static_cast<Eigen::Index>(step)) = v.transpose();
    }
    return out;
}

HavokModel sparsify(HavokModel model, double lambda) {
    if (lambda <= 0.0) return model;
    for (Eigen::Index i = 0; i < model.A.rows(); ++i)
        for (Eigen::Index j = 0; j < model.A.cols(); ++j)
            if (std::fabs(model.A(i, j)) < lambda) model.A(i, j) = 0.0;
    for (Eigen::Index i = 0; i < model.B.size(); ++i)
        if (std::fabs(model.B(i)) < lambda) model.B(i) = 0.0;
    return model;
}

ForcingProjector::ForcingProjector(const SvdFactors& f, std::size_t r)
    : q_(f.q), r_(r), tau_(f.tau), dt_(f.dt) {
    if (r < 2 || r > static_cast<std::size_t>(f.U.cols()))
        throw RankTooLarge("projector rank out of range");
    basis_ = f.U.leftCols(static_cast<Eigen::Index>(r));
    sigma_ = f.S.head(static_cast<Eigen::Index>(r));
    for (Eigen::Index i = 0; i < sigma_.size(); ++i)
        if (sigma_(i) <= 0.0)
            throw NumericalFailure("cannot project onto a zero singular direction");
}

double ForcingProjector::project_window(std::span<const double> window) const {
    if (window.size() != q_) throw LengthMismatch("window length differs from q");
    const Eigen::Index k = static_cast<Eigen::Index>(r_) - 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < q_; ++i) acc += basis_(static_cast<Eigen::Index>(i), k) * window[i];
    return acc / sigma_(k);
}

std::vector<double> ForcingProjector::project_series(std::span<const double> series) const {
    const std::size_t span = (q_ - 1) * tau_;
    if (series.size() <= span)
        throw SeriesTooShort("series shorter than one delay window", span + 1);
    const std::size_t p = series.size() - span;

    Eigen::MatrixXd coords(static_cast<Eigen::Index>(p), 1);
    const Eigen::MatrixXd last = basis_.rightCols(1);
    const Eigen::VectorXd sig = sigma_.tail(1);
    kernels::project_windows(series, last, sig, tau_, coords);

    std::vector<double> out(p);
    for (std::size_t i = 0; i < p; ++i) out[i] = coords(static_cast<Eigen::Index>(i), 0);
    return out;
}

}  // namespace dynamo

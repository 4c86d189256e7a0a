#include "dynamo/sindy.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

#include "dynamo/error.hpp"
#include "dynamo/kernels.hpp"
#include "dynamo/parallel.hpp"
#include "dynamo/time.hpp"

namespace dynamo {

namespace {

std::vector<std::string> default_state_names(std::size_t n) {
    std::vector<std::string> names(n);
    for (std::size_t i = 0; i < n; ++i) names[i] = "x" + std::to_string(i);
    return names;
}

std::string monomial_name(const std::uint8_t* expo, std::size_t s,
                          const std::vector<std::string>& names) {
    std::string out;
    for (std::size_t i = 0; i < s; ++i) {
        if (expo[i] == 0) continue;
        if (!out.empty()) out += "*";
        out += names[i];
        if (expo[i] > 1) out += "^" + std::to_string(expo[i]);
    }
    return out.empty() ? "1" : out;
}

std::string freq_prefix(double freq) {
    return freq == 1.0 ? "" : format_value(freq) + "*";
}

// multisets of state indices of size `degree` in lexicographic order
void enumerate_monomials(std::size_t n_states, int degree,
                         std::vector<std::uint8_t>& exponents,
                         std::size_t& n_monomials) {
    std::vector<int> pick(degree, 0);
    while (true) {
        std::vector<std::uint8_t> expo(n_states, 0);
        for (int k = 0; k < degree; ++k) ++expo[pick[k]];
        exponents.insert(exponents.end(), expo.begin(), expo.end());
        ++n_monomials;
        // next non-decreasing sequence
        int pos = degree - 1;
        while (pos >= 0 && pick[pos] == static_cast<int>(n_states) - 1) --pos;
        if (pos < 0) break;
        const int v = pick[pos] + 1;
        for (int k = pos; k < degree; ++k) pick[k] = v;
    }
}

}  // namespace

CompiledLibrary compile_library(const LibrarySpec& spec, std::size_t n_states,
                                const std::vector<std::string>& state_names) {
    if (n_states == 0) throw DataError("library needs at least one state");
    if (spec.polynomial_degree < 0 || spec.polynomial_degree > 255)
        throw ConfigError("polynomial degree out of range");

    CompiledLibrary lib;
    lib.n_states = n_states;
    const auto names =
        state_names.empty() ? default_state_names(n_states) : state_names;
    if (names.size() != n_states)
        throw LengthMismatch("state name count differs from state count");

    if (spec.include_constant) {
        lib.exponents.insert(lib.exponents.end(), n_states, 0);
        ++lib.n_monomials;
    }
    for (int d = 1; d <= spec.polynomial_degree; ++d)
        enumerate_monomials(n_states, d, lib.exponents, lib.n_monomials);
    for (std::size_t m = 0; m < lib.n_monomials; ++m)
        lib.names.push_back(
            monomial_name(lib.exponents.data() + m * n_states, n_states, names));

    if (spec.include_trig) {
        for (double freq : spec.trig_frequencies) {
            for (std::size_t s = 0; s < n_states; ++s) {
                lib.trig.push_back({true, freq, static_cast<int>(s)});
                lib.names.push_back("sin(" + freq_prefix(freq) + names[s] + ")");
                lib.trig.push_back({false, freq, static_cast<int>(s)});
                lib.names.push_back("cos(" + freq_prefix(freq) + names[s] + ")");
            }
        }
    }
    if (spec.pairwise_trig_differences) {
        for (std::size_t a = 0; a < n_states; ++a) {
            for (std::size_t b = a + 1; b < n_states; ++b) {
                lib.diffs.push_back({true, static_cast<int>(a), static_cast<int>(b)});
                lib.names.push_back("sin(" + names[a] + "-" + names[b] + ")");
                lib.diffs.push_back({false, static_cast<int>(a), static_cast<int>(b)});
                lib.names.push_back("cos(" + names[a] + "-" + names[b] + ")");
            }
        }
    }

    if (lib.names.empty()) throw EmptyLibrary("library spec generates zero features");
    return lib;
}

void CompiledLibrary::eval_row(const Eigen::VectorXd& x, Eigen::VectorXd& out) const {
    out.resize(static_cast<Eigen::Index>(n_features()));
    Eigen::Index f = 0;
    for (std::size_t m = 0; m < n_monomials; ++m) {
        const std::uint8_t* expo = exponents.data() + m * n_states;
        double acc = 1.0;
        for (std::size_t s = 0; s < n_states; ++s)
            for (int k = 0; k < expo[s]; ++k) acc *= x(static_cast<Eigen::Index>(s));
        out(f++) = acc;
    }
    for (const auto& op : trig) {
        const double v = op.freq * x(op.state);
        out(f++) = op.sine ? std::sin(v) : std::cos(v);
    }
    for (const auto& op : diffs) {
        const double v = x(op.a) - x(op.b);
        out(f++) = op.sine ? std::sin(v) : std::cos(v);
    }
}

LibraryMatrix build_library(const Eigen::MatrixXd& X, const LibrarySpec& spec,
                            const std::vector<std::string>& state_names) {
    if (X.rows() < 1 || X.cols() < 1)
        throw DataError("library needs at least one sample and one state");
    const auto lib = compile_library(spec, static_cast<std::size_t>(X.cols()),
                                     state_names);

    LibraryMatrix out;
    out.names = lib.names;
    const Eigen::Index n = X.rows();
    out.theta.resize(n, static_cast<Eigen::Index>(lib.n_features()));

    if (lib.n_monomials > 0) {
        Eigen::MatrixXd mono(n, static_cast<Eigen::Index>(lib.n_monomials));
        kernels::monomials(X, lib.exponents, lib.n_monomials, mono);
        out.theta.leftCols(mono.cols()) = mono;
    }

    Eigen::Index f = static_cast<Eigen::Index>(lib.n_monomials);
    for (const auto& op : lib.trig) {
#pragma omp parallel for num_threads(max_threads()) schedule(static) if (parallel_enabled())
        for (Eigen::Index i = 0; i < n; ++i) {
            const double v = op.freq * X(i, op.state);
            out.theta(i, f) = op.sine ? std::sin(v) : std::cos(v);
        }
        ++f;
    }
    for (const auto& op : lib.diffs) {
#pragma omp parallel for num_threads(max_threads()) schedule(static) if (parallel_enabled())
        for (Eigen::Index i = 0; i < n; ++i) {
            const double v = X(i, op.a) - X(i, op.b);
            out.theta(i, f) = op.sine ? std::sin(v) : std::cos(v);
        }
        ++f;
    }
    return out;
}

namespace {

// ridge least squares on the selected feature columns via the stacked QR
Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& theta,
                            const std::vector<Eigen::Index>& active,
                            const Eigen::VectorXd& target, double alpha) {
    const Eigen::Index n = theta.rows();
    const Eigen::Index k = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd A(n + (alpha > 0.0 ? k : 0), k);
    for (Eigen::Index j = 0; j < k; ++j) A.col(j).head(n) = theta.col(active[j]);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(A.rows());
    b.head(n) = target;
    if (alpha > 0.0)
        A.bottomRows(k) = std::sqrt(alpha) *
                          Eigen::MatrixXd::Identity(k, k);
    return A.colPivHouseholderQr().solve(b);
}

}  // namespace

Eigen::MatrixXd stlsq(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& dX,
                      double lambda, double alpha, std::size_t max_iter) {
    if (theta.rows() != dX.rows())
        throw LengthMismatch("library and derivative row counts differ");
    if (lambda < 0.0 || alpha < 0.0)
        throw ConfigError("threshold and ridge weight must be non-negative");

    const Eigen::Index n_features = theta.cols();
    const Eigen::Index n_states = dX.cols();
    Eigen::MatrixXd zeta = Eigen::MatrixXd::Zero(n_features, n_states);

    for (Eigen::Index s = 0; s < n_states; ++s) {
        std::vector<Eigen::Index> active(static_cast<std::size_t>(n_features));
        for (Eigen::Index f = 0; f < n_features; ++f) active[f] = f;

        Eigen::VectorXd coefs;
        bool converged = false;
        for (std::size_t it = 0; it == 0 || it < max_iter; ++it) {
            coefs = ridge_solve(theta, active, dX.col(s), alpha);
            if (lambda <= 0.0) {
                converged = true;
                break;
            }
            std::vector<Eigen::Index> survivors;
            for (std::size_t j = 0; j < active.size(); ++j)
                if (std::fabs(coefs[static_cast<Eigen::Index>(j)]) >= lambda)
                    survivors.push_back(active[j]);
            if (survivors.empty())
                throw NoActiveTerms("thresholding removed every feature for state " +
                                        std::to_string(s),
                                    static_cast<std::size_t>(s));
            converged = survivors.size() == active.size();
            active = std::move(survivors);
            if (converged) break;
        }
        if (!converged) coefs = ridge_solve(theta, active, dX.col(s), alpha);

        // the sparsity invariant holds exactly even at max_iter exhaustion
        bool any = false;
        for (std::size_t j = 0; j < active.size(); ++j) {
            const double c = coefs[static_cast<Eigen::Index>(j)];
            if (lambda > 0.0 && std::fabs(c) < lambda) continue;
            zeta(active[j], s) = c;
            any = true;
        }
        if (!any)
            throw NoActiveTerms("thresholding removed every feature for state " +
                                    std::to_string(s),
                                static_cast<std::size_t>(s));
    }
    return zeta;
}

SindyModel fit_sindy(const Eigen::MatrixXd& X, double dt, const LibrarySpec& spec,
                     const FitOptions& opts,
                     const std::vector<std::string>& state_names) {
    if (X.rows() < 5)
        throw TooFewPoints("need at least 5 samples for the derivative stencil");
    const Eigen::Index n = X.rows(), s = X.cols();

    SindyModel model;
    model.library = spec;
    model.dt = dt;
    model.threshold = opts.lambda;
    model.ridge = opts.alpha;
    model.standardized = opts.standardize;
    model.state_names =
        state_names.empty() ? default_state_names(static_cast<std::size_t>(s))
                            : state_names;
    model.state_means = Eigen::VectorXd::Zero(s);
    model.state_stds = Eigen::VectorXd::Ones(s);

    Eigen::MatrixXd Z = X;
    if (opts.standardize) {
        for (Eigen::Index j = 0; j < s; ++j) {
            const double m = X.col(j).mean();
            const double var = (X.col(j).array() - m).square().sum() /
                               static_cast<double>(n);
            const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
            model.state_means(j) = m;
            model.state_stds(j) = sd;
            Z.col(j) = (X.col(j).array() - m) / sd;
        }
    }

    Eigen::MatrixXd dZ(n - 4, s);
    kernels::central_diff4(Z, dt, dZ);
    const Eigen::MatrixXd Z_interior = Z.middleRows(2, n - 4);

    auto lib = build_library(Z_interior, spec, model.state_names);
    model.feature_names = lib.names;
    model.coefficients = stlsq(lib.theta, dZ, opts.lambda, opts.alpha, opts.max_iter);
    return model;
}

SindySimulation simulate_sindy(const SindyModel& model, const Eigen::VectorXd& x0,
                               std::size_t n) {
    const Eigen::Index s = model.coefficients.cols();
    if (x0.size() != s) throw LengthMismatch("initial state dimension differs from model");
    if (!x0.allFinite()) throw NonFiniteState("initial state is not finite");

    const auto lib = compile_library(model.library, static_cast<std::size_t>(s),
                                     model.state_names);
    if (static_cast<Eigen::Index>(lib.n_features()) != model.coefficients.rows())
        throw DataError("model coefficients do not match its library");

    Eigen::VectorXd z(s);
    for (Eigen::Index j = 0; j < s; ++j)
        z(j) = model.standardized
                   ? (x0(j) - model.state_means(j)) / model.state_stds(j)
                   : x0(j);

    SindySimulation sim;
    sim.states.resize(static_cast<Eigen::Index>(n), s);
    Eigen::VectorXd feat, k1(s), k2(s), k3(s), k4(s), tmp(s);
    auto deriv = [&](const Eigen::VectorXd& state, Eigen::VectorXd& out) {
        lib.eval_row(state, feat);
        out = model.coefficients.transpose() * feat;
    };

    const double h = model.dt;
    for (std::size_t step = 0; step < n; ++step) {
        deriv(z, k1);
        tmp = z + 0.5 * h * k1;
        deriv(tmp, k2);
        tmp = z + 0.5 * h * k2;
        deriv(tmp, k3);
        tmp = z + h * k3;
        deriv(tmp, k4);
        z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!z.allFinite()) {
            sim.diverged = true;
            sim.states.conservativeResize(static_cast<Eigen::Index>(step), s);
            return sim;
        }
        for (Eigen::Index j = 0; j < s; ++j)
            sim.states(static_cast<Eigen::Index>(step), j) =
                model.standardized
                    ? model.state_means(j) + model.state_stds(j) * z(j)
                    : z(j);
        sim.steps = step + 1;
    }
    return sim;
}

}  // namespace dynamo

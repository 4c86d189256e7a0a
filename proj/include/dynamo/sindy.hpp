#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace dynamo {

// Candidate-function dictionary. Feature order is canonical and fully
// determined by the spec: constant, degree-1..d monomials in graded
// lexicographic order, sin/cos of each state per frequency, then sin/cos
// of pairwise state differences.
struct LibrarySpec {
    int polynomial_degree = 3;
    bool include_constant = true;
    bool include_trig = false;
    std::vector<double> trig_frequencies = {1.0};
    bool pairwise_trig_differences = false;
};

// A library spec bound to a state dimension: exponent tables, trig ops
// and reproducible feature names. Both the bulk evaluation and the
// per-step evaluation inside simulate run off this one table.
struct CompiledLibrary {
    struct TrigOp {
        bool sine;
        double freq;
        int state;
    };
    struct DiffOp {
        bool sine;
        int a;
        int b;
    };

    std::size_t n_states = 0;
    std::size_t n_monomials = 0;
    std::vector<std::uint8_t> exponents;  // n_monomials x n_states, row-major
    std::vector<TrigOp> trig;
    std::vector<DiffOp> diffs;
    std::vector<std::string> names;

    std::size_t n_features() const { return names.size(); }

    void eval_row(const Eigen::VectorXd& x, Eigen::VectorXd& out) const;
};

CompiledLibrary compile_library(const LibrarySpec& spec, std::size_t n_states,
                                const std::vector<std::string>& state_names = {});

struct LibraryMatrix {
    Eigen::MatrixXd theta;  // n_samples x n_features
    std::vector<std::string> names;
};

// Throws EmptyLibrary when the spec generates no features.
LibraryMatrix build_library(const Eigen::MatrixXd& X, const LibrarySpec& spec,
                            const std::vector<std::string>& state_names = {});

// Sequentially-thresholded least squares: ridge solve, zero |coef| <
// lambda, re-solve on the surviving support until fixed point or
// max_iter. Throws NoActiveTerms naming the state that lost every
// feature.
Eigen::MatrixXd stlsq(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& dX,
                      double lambda, double alpha, std::size_t max_iter = 25);

struct SindyModel {
    LibrarySpec library;
    Eigen::MatrixXd coefficients;  // n_features x n_states
    std::vector<std::string> feature_names;
    std::vector<std::string> state_names;
    double dt = 1.0;
    double threshold = 0.0;  // lambda
    double ridge = 0.0;      // alpha
    // standardization applied before library construction (identity when
    // disabled); simulate() maps back to physical units
    bool standardized = false;
    Eigen::VectorXd state_means;
    Eigen::VectorXd state_stds;
};

struct FitOptions {
    double lambda = 0.1;
    double alpha = 0.05;
    std::size_t max_iter = 25;
    bool standardize = true;
};

// Derivatives by fourth-order central differences, library construction,
// then STLSQ. X is samples x states at uniform spacing dt.
SindyModel fit_sindy(const Eigen::MatrixXd& X, double dt, const LibrarySpec& spec,
                     const FitOptions& opts,
                     const std::vector<std::string>& state_names = {});

struct SindySimulation {
    Eigen::MatrixXd states;  // steps x n_states, one row per completed step
    bool diverged = false;
    std::size_t steps = 0;
};

// RK4 integration of dx/dt = zeta^T theta(x). Halts with the partial
// trajectory when the state leaves finite range.
SindySimulation simulate_sindy(const SindyModel& model, const Eigen::VectorXd& x0,
                               std::size_t n);

}  // namespace dynamo

#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dynamo/timeseries.hpp"

namespace dynamo {

enum class SynthEventKind { voltage_sag, current_inrush, capacitor_step, tap_step };

SynthEventKind synth_event_kind_from_string(const std::string& s);
std::string to_string(SynthEventKind k);

struct SynthEventSpec {
    SynthEventKind kind = SynthEventKind::tap_step;
    std::size_t onset = 0;      // sample index
    std::size_t duration = 60;  // samples
    double magnitude = 0.02;    // relative per-unit change
};

// One sinusoidal component of a daily-pattern profile.
struct ProfileComponent {
    double amplitude = 0.0;
    double period_s = 86400.0;
    double phase = 0.0;  // radians
};

struct ChannelProfile {
    double base = 1.0;
    std::vector<ProfileComponent> components;
};

// Base profiles of the three generated channels (V, I, PF).
struct SynthProfiles {
    ChannelProfile voltage;
    ChannelProfile current;
    ChannelProfile power_factor;

    static SynthProfiles defaults();
};

struct SynthResult {
    MeasurementFrame frame;         // channels V, I, PF (noisy)
    std::vector<std::uint8_t> truth;  // 1 inside any injected event window
    MeasurementFrame clean;         // same channels without noise or events
};

// Classical RK4 integration of the Lorenz system; returns n states
// including the initial condition as row 0. Deterministic.
Eigen::MatrixXd lorenz(double sigma, double rho, double beta,
                       const std::array<double, 3>& x0, double dt, std::size_t n);

// Quasi-periodic V/I/PF channels with seeded Gaussian noise and event
// signatures superimposed. Events must not overlap. The truth flags are
// the construction record: exactly the injected windows.
SynthResult synth_pmu(const SynthProfiles& profiles, double noise_std,
                      const std::vector<SynthEventSpec>& events, std::size_t n,
                      std::uint64_t seed, double sample_interval_s = 1.0,
                      Timestamp start = 0);

}  // namespace dynamo
